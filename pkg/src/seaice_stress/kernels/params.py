"""Parameters, execution options and the stress/strain state of the update."""
from __future__ import annotations

import enum
from dataclasses import dataclass, fields as dc_fields

import numpy as np

from ..basis import ADVECTION_DOFS, STRESS_DOFS
from ..fields import DGField, Precision, StorageLayout, convert_layout


@dataclass(frozen=True)
class VPParams:
    """Viscous-plastic constants.

    Pstar is the ice strength scale (N/m^2), DeltaMin the deformation-rate
    floor (1/s), alpha the mEVP relaxation parameter and C the concentration
    exponent in ``P = Pstar h exp(-C (1 - a))``.
    """

    Pstar: float = 27500.0
    DeltaMin: float = 2e-9
    alpha: float = 1500.0
    C: float = 20.0

    def __post_init__(self):
        if not self.Pstar > 0:
            raise ValueError(f"Pstar must be positive, got {self.Pstar}")
        if not self.DeltaMin > 0:
            raise ValueError(f"DeltaMin must be positive, got {self.DeltaMin}")
        if not self.alpha > 1:
            raise ValueError(f"alpha must exceed 1, got {self.alpha}")
        if not self.C > 0:
            raise ValueError(f"C must be positive, got {self.C}")

    def replace(self, **changes) -> "VPParams":
        values = {f.name: getattr(self, f.name) for f in dc_fields(self)}
        values.update(changes)
        return VPParams(**values)


class MapMode(enum.Enum):
    PRECOMPUTED = "pre"
    ON_THE_FLY = "fly"


@dataclass(frozen=True)
class ExecPolicy:
    """Serial execution, or a pool of ``workers`` threads over element ranges."""

    parallel: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError(f"worker count must be >= 1, got {self.workers}")
        if not self.parallel and self.workers != 1:
            raise ValueError("serial execution uses exactly one worker")

    @classmethod
    def serial(cls) -> "ExecPolicy":
        return cls(False, 1)

    @classmethod
    def threads(cls, workers: int) -> "ExecPolicy":
        return cls(True, workers)

    @property
    def label(self) -> str:
        return "parallel" if self.parallel else "serial"


SERIAL = ExecPolicy.serial()

STRESS_NAMES = ("S11", "S12", "S22")
STRAIN_NAMES = ("E11", "E12", "E22")
FIELD_NAMES = STRESS_NAMES + STRAIN_NAMES + ("H", "A")


@dataclass
class StressState:
    S11: DGField
    S12: DGField
    S22: DGField
    E11: DGField
    E12: DGField
    E22: DGField
    H: DGField
    A: DGField

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        ref = self.S11
        for name in FIELD_NAMES:
            f = getattr(self, name)
            if f.n_elements != ref.n_elements:
                raise ValueError(f"{name} has {f.n_elements} elements, "
                                 f"expected {ref.n_elements}")
            if f.layout is not ref.layout:
                raise ValueError(f"{name} layout differs from S11")
            if f.precision is not ref.precision:
                raise ValueError(f"{name} precision differs from S11")
        for name in STRESS_NAMES + STRAIN_NAMES:
            if getattr(self, name).n_local != ref.n_local:
                raise ValueError(f"{name} must have n_S={ref.n_local} DOFs")
        if self.A.n_local != self.H.n_local:
            raise ValueError("H and A must share the advection space")
        if self.n_S not in STRESS_DOFS:
            raise ValueError(f"unsupported stress space n_S={self.n_S}")
        if self.n_A not in ADVECTION_DOFS:
            raise ValueError(f"unsupported advection space n_A={self.n_A}")

    @property
    def n_elements(self) -> int:
        return self.S11.n_elements

    @property
    def n_S(self) -> int:
        return self.S11.n_local

    @property
    def n_A(self) -> int:
        return self.H.n_local

    @property
    def layout(self) -> StorageLayout:
        return self.S11.layout

    @property
    def precision(self) -> Precision:
        return self.S11.precision

    @property
    def stresses(self) -> tuple[DGField, DGField, DGField]:
        return self.S11, self.S12, self.S22

    def _map(self, fn) -> "StressState":
        return StressState(**{n: fn(getattr(self, n)) for n in FIELD_NAMES})

    def copy(self) -> "StressState":
        return self._map(DGField.copy)

    def with_layout(self, layout: StorageLayout) -> "StressState":
        return self._map(lambda f: convert_layout(f, layout))

    def astype(self, precision: Precision) -> "StressState":
        return self._map(lambda f: f.astype(precision))

    def stress_arrays(self) -> np.ndarray:
        """Logical (3, N, n_S) float64 copy of the stress fields."""
        return np.stack([f.values.astype(np.float64) for f in self.stresses])
