"""Per-element mEVP stress update.

For each element, with Gauss-point values

    h = max(0, H_i PSI_A)             a = min(1, max(0, A_i PSI_A))
    e11, e12, e22 = E_i PSI_S
    P   = Pstar h exp(-C (1 - a))
    D   = sqrt(DeltaMin^2 + 1.25 (e11^2 + e22^2) + 1.5 e11 e22 + e12^2)
    P_D = P / D

the stresses relax as

    S11_i <- (1 - 1/alpha) S11_i + map_i (1/alpha) (P_D (5/8 e11 + 3/8 e22) - P/2)
    S12_i <- (1 - 1/alpha) S12_i + map_i (1/alpha) (P_D e12 / 4)
    S22_i <- (1 - 1/alpha) S22_i + map_i (1/alpha) (P_D (5/8 e22 + 3/8 e11) - P/2)

All arithmetic runs in the precision of the fields; sums run in ascending
index order, so any split of the element range reproduces the serial bits.
"""
from __future__ import annotations

import functools
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numba import njit

from ..basis import psi_table
from ..mesh import Mesh
from .maps import DegenerateElementError, InverseMapTable, inverse_map_into, stress_tables
from .params import SERIAL, ExecPolicy, MapMode, StressState, VPParams

# indices into the constants vector handed to the numba kernels
_PSTAR, _DMIN, _AINV, _FAC, _CEXP, _ZERO, _ONE, _HALF, _C58, _C38, _C14, _C54, _C32 = range(13)


def kernel_constants(params: VPParams, dtype) -> np.ndarray:
    alpha_inv = 1.0 / params.alpha
    return np.array([params.Pstar, params.DeltaMin, alpha_inv, 1.0 - alpha_inv,
                     params.C, 0.0, 1.0, 0.5, 5.0 / 8.0, 3.0 / 8.0, 0.25, 1.25, 1.5],
                    dtype=dtype)


@njit(nogil=True, cache=True, inline="always")
def _gauss_values(i, E11, E12, E22, H, A, psi_a, psi_s, k, hg, ag, e11, e12, e22):
    zero = k[_ZERO]
    one = k[_ONE]
    n_a = psi_a.shape[0]
    n_s = psi_s.shape[0]
    for g in range(psi_s.shape[1]):
        hv = zero
        av = zero
        for j in range(n_a):
            hv += H[i, j] * psi_a[j, g]
            av += A[i, j] * psi_a[j, g]
        hg[g] = max(zero, hv)
        ag[g] = min(one, max(zero, av))
        v11 = zero
        v12 = zero
        v22 = zero
        for j in range(n_s):
            v11 += E11[i, j] * psi_s[j, g]
            v12 += E12[i, j] * psi_s[j, g]
            v22 += E22[i, j] * psi_s[j, g]
        e11[g] = v11
        e12[g] = v12
        e22[g] = v22


@njit(nogil=True, cache=True, inline="always")
def _strength(hv, av, k):
    return k[_PSTAR] * hv * math.exp(-k[_CEXP] * (k[_ONE] - av))


@njit(nogil=True, cache=True, inline="always")
def _delta(v11, v12, v22, k):
    dmin = k[_DMIN]
    return math.sqrt(dmin * dmin + k[_C54] * (v11 * v11 + v22 * v22)
                     + k[_C32] * v11 * v22 + v12 * v12)


@njit(nogil=True, cache=True)
def _update_range(lo, hi, S11, S12, S22, E11, E12, E22, H, A, psi_a, psi_s, k,
                  maps, on_the_fly, corners, psi64, pts, w):
    n_s, ng = psi_s.shape
    dt = S11.dtype
    hg = np.empty(ng, dt)
    ag = np.empty(ng, dt)
    e11 = np.empty(ng, dt)
    e12 = np.empty(ng, dt)
    e22 = np.empty(ng, dt)
    r11 = np.empty(ng, dt)
    r12 = np.empty(ng, dt)
    r22 = np.empty(ng, dt)
    local = np.empty((1, n_s, ng), dt)
    map64 = np.empty((n_s, ng))
    mass = np.empty((n_s, n_s))
    ainv = k[_AINV]
    fac = k[_FAC]
    half = k[_HALF]
    c58 = k[_C58]
    c38 = k[_C38]
    c14 = k[_C14]
    zero = k[_ZERO]
    for i in range(lo, hi):
        if on_the_fly:
            if not inverse_map_into(corners[i], psi64, pts, w, mass, map64) > 0.0:
                return i
            for j in range(n_s):
                for g in range(ng):
                    local[0, j, g] = map64[j, g]
            table = local
            row = 0
        else:
            table = maps
            row = i
        _gauss_values(i, E11, E12, E22, H, A, psi_a, psi_s, k, hg, ag, e11, e12, e22)
        for g in range(ng):
            p = _strength(hg[g], ag[g], k)
            pd = p / _delta(e11[g], e12[g], e22[g], k)
            r11[g] = ainv * (pd * (c58 * e11[g] + c38 * e22[g]) - half * p)
            r12[g] = ainv * (pd * c14 * e12[g])
            r22[g] = ainv * (pd * (c58 * e22[g] + c38 * e11[g]) - half * p)
        for j in range(n_s):
            a11 = zero
            a12 = zero
            a22 = zero
            for g in range(ng):
                m = table[row, j, g]
                a11 += m * r11[g]
                a12 += m * r12[g]
                a22 += m * r22[g]
            S11[i, j] = fac * S11[i, j] + a11
            S12[i, j] = fac * S12[i, j] + a12
            S22[i, j] = fac * S22[i, j] + a22
    return -1


@functools.lru_cache(maxsize=None)
def _pool(workers: int) -> ThreadPoolExecutor:
    return ThreadPoolExecutor(max_workers=workers, thread_name_prefix="stress")


def element_ranges(n: int, parts: int) -> list[tuple[int, int]]:
    """Split [0, n) into ``parts`` contiguous, nearly equal ranges."""
    parts = max(1, min(parts, n))
    bounds = [n * p // parts for p in range(parts + 1)]
    return [(bounds[p], bounds[p + 1]) for p in range(parts)]


def _kernel_tables(state: StressState):
    dtype = state.precision.dtype
    rule, table_s = stress_tables(state.n_S)
    psi_s = np.ascontiguousarray(table_s.values, dtype=dtype)
    psi_a = np.ascontiguousarray(psi_table(state.n_A, rule.ngp).values, dtype=dtype)
    return rule, table_s, psi_a, psi_s


def stress_update(state: StressState, params: VPParams,
                  maps: InverseMapTable | None = None, mesh: Mesh | None = None,
                  mode: MapMode = MapMode.PRECOMPUTED,
                  policy: ExecPolicy = SERIAL) -> None:
    """Relax the stresses of ``state`` in place by one mEVP iteration.

    ``mode`` selects whether the element inverse maps come from ``maps`` or
    are recomputed from the corners of ``mesh`` inside the loop.
    """
    state.validate()
    mode = MapMode(mode)
    n = state.n_elements
    dtype = state.precision.dtype
    rule, table_s, psi_a, psi_s = _kernel_tables(state)
    k = kernel_constants(params, dtype)
    if mode is MapMode.PRECOMPUTED:
        if maps is None:
            raise ValueError("precomputed mode needs an inverse map table")
        if maps.data.shape != (n, state.n_S, rule.n_g):
            raise ValueError(f"inverse map table has shape {maps.data.shape}, "
                             f"expected {(n, state.n_S, rule.n_g)}")
        map_arr = maps.astype(dtype)
        corners = np.empty((1, 4, 2))
        on_the_fly = False
    else:
        if mesh is None:
            raise ValueError("on-the-fly mode needs the mesh")
        if mesh.n_elements != n:
            raise ValueError(f"mesh has {mesh.n_elements} elements, state has {n}")
        map_arr = np.empty((1, state.n_S, rule.n_g), dtype)
        corners = np.ascontiguousarray(mesh.corners())
        on_the_fly = True
    psi64 = np.ascontiguousarray(table_s.values)
    pts, w = rule.points, rule.weights
    args = tuple(f.values for f in (state.S11, state.S12, state.S22, state.E11,
                                    state.E12, state.E22, state.H, state.A))
    args += (psi_a, psi_s, k, map_arr, on_the_fly, corners, psi64, pts, w)

    if policy.parallel:
        futures = [_pool(policy.workers).submit(_update_range, lo, hi, *args)
                   for lo, hi in element_ranges(n, policy.workers)]
        bad = [f.result() for f in futures]
    else:
        bad = [_update_range(0, n, *args)]
    bad = [b for b in bad if b >= 0]
    if bad:
        raise DegenerateElementError(f"element {min(bad)} has a non-positive Jacobian")


def gauss_diagnostics(state: StressState, params: VPParams):
    """Gauss-point arrays (h, a, P, D), each (N, n_G), as the kernel sees them."""
    dtype = state.precision.dtype
    rule, _, psi_a, psi_s = _kernel_tables(state)
    k = kernel_constants(params, dtype)
    shape = (state.n_elements, rule.n_g)
    h, a, e11, e12, e22 = (np.empty(shape, dtype) for _ in range(5))
    _gauss_block(state.E11.values, state.E12.values, state.E22.values,
                 state.H.values, state.A.values, psi_a, psi_s, k,
                 h, a, e11, e12, e22)
    P = np.empty(shape, dtype)
    D = np.empty(shape, dtype)
    _strength_delta_block(h, a, e11, e12, e22, k, P, D)
    return h, a, P, D


@njit(nogil=True, cache=True)
def _gauss_block(E11, E12, E22, H, A, psi_a, psi_s, k, h, a, e11, e12, e22):
    for i in range(H.shape[0]):
        _gauss_values(i, E11, E12, E22, H, A, psi_a, psi_s, k,
                      h[i], a[i], e11[i], e12[i], e22[i])


@njit(nogil=True, cache=True)
def _strength_delta_block(h, a, e11, e12, e22, k, P, D):
    for i in range(h.shape[0]):
        for g in range(h.shape[1]):
            P[i, g] = _strength(h[i, g], a[i, g], k)
            D[i, g] = _delta(e11[i, g], e12[i, g], e22[i, g], k)
