"""Repeated stress updates with fixed strain, height and concentration."""
from __future__ import annotations

import numpy as np

from ..mesh import Mesh
from .maps import InverseMapTable
from .params import SERIAL, ExecPolicy, MapMode, StressState, VPParams
from .update import stress_update


def mevp_relax(state: StressState, params: VPParams, steps: int,
               maps: InverseMapTable | None = None, mesh: Mesh | None = None,
               mode: MapMode = MapMode.PRECOMPUTED,
               policy: ExecPolicy = SERIAL) -> np.ndarray:
    """Apply ``steps`` updates; return the max-norm stress increment of each step.

    The iteration is affine in S with contraction factor ``1 - 1/alpha``, so
    consecutive increments shrink by exactly that factor until they reach
    the rounding level of the stresses themselves.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    history = np.empty(steps)
    prev = state.stress_arrays()
    for p in range(steps):
        stress_update(state, params, maps=maps, mesh=mesh, mode=mode, policy=policy)
        cur = state.stress_arrays()
        history[p] = np.abs(cur - prev).max()
        prev = cur
    return history
