"""Oracle check of every kernel variant on random inputs."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ..basis import ADVECTION_DOFS, STRESS_DOFS
from ..fields import Precision, StorageLayout
from ..mesh import Mesh, build_structured_mesh
from ..kernels import (ExecPolicy, MapMode, StressState, TensorStrategy, VPParams,
                       precompute_inverse_maps, random_state, relative_max_deviation,
                       stress_update, stress_update_reference, tensorized_stress_update)
from .harness import F32_TOLERANCE, F64_TOLERANCE, grid_shape


@dataclass
class Check:
    n_elements: int
    n_A: int
    n_S: int
    precision: Precision
    variant: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance

    def __str__(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return (f"{mark} N={self.n_elements} n_A={self.n_A} n_S={self.n_S} "
                f"{self.precision.value} {self.variant}: {self.deviation:.3e} "
                f"(tol {self.tolerance:.0e})")


def variant_results(state: StressState, mesh: Mesh, params: VPParams,
                    workers: int = 4) -> Iterator[tuple[str, StressState]]:
    """Yield ``(label, updated copy)`` for every kernel variant."""
    maps = precompute_inverse_maps(mesh, state.n_S)
    policies = (ExecPolicy.serial(), ExecPolicy.threads(workers))
    for layout in StorageLayout:
        start = state.with_layout(layout)
        for mode in MapMode:
            for policy in policies:
                s = start.copy()
                stress_update(s, params, maps=maps, mesh=mesh, mode=mode, policy=policy)
                yield f"{layout.value}/{mode.value}/{policy.label}", s
        for strategy in TensorStrategy:
            s = start.copy()
            tensorized_stress_update(s, maps, params, strategy)
            yield f"{layout.value}/tensor-{strategy.value}", s


def run_verification(n_elements: int = 1024, distortion: float = 0.2,
                     precisions=(Precision.F64, Precision.F32),
                     params: VPParams | None = None, workers: int = 4,
                     seed: int = 0) -> list[Check]:
    params = params or VPParams()
    rng = np.random.default_rng(seed)
    nx, ny = grid_shape(n_elements)
    mesh = build_structured_mesh(nx, ny, 512e3, 512e3, distortion)
    checks = []
    for n_a in ADVECTION_DOFS:
        for n_s in STRESS_DOFS:
            base = random_state(n_elements, n_a, n_s, rng,
                                stress_scale=params.Pstar / params.alpha)
            for precision in precisions:
                state = base.astype(precision)
                reference = stress_update_reference(state, mesh, params)
                tol = F64_TOLERANCE if precision is Precision.F64 else F32_TOLERANCE
                for label, result in variant_results(state, mesh, params, workers):
                    dev = relative_max_deviation(result.stresses, reference)
                    checks.append(Check(n_elements, n_a, n_s, precision, label, dev, tol))
    return checks
