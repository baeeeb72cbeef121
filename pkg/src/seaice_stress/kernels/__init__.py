"""The mEVP stress update and its variants."""
from .maps import (DegenerateElementError, InverseMapTable, element_inverse_map,
                   precompute_inverse_maps)
from .params import SERIAL, ExecPolicy, MapMode, StressState, VPParams
from .reference import relative_max_deviation, stress_update_reference
from .relax import mevp_relax
from .synth import Scenario, random_state, synth_fields, vortex_strain
from .tensorized import TensorStrategy, tensorized_stress_update, vp_stress_target
from .update import gauss_diagnostics, stress_update

__all__ = [
    "DegenerateElementError", "ExecPolicy", "InverseMapTable", "MapMode", "SERIAL",
    "Scenario", "StressState", "TensorStrategy", "VPParams", "element_inverse_map",
    "gauss_diagnostics", "mevp_relax", "precompute_inverse_maps", "random_state", "relative_max_deviation",
    "stress_update", "stress_update_reference", "synth_fields", "vortex_strain",
    "tensorized_stress_update", "vp_stress_target",
]
