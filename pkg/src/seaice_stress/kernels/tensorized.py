"""Whole-field formulation of the stress update.

The element loop disappears: Gauss evaluations become (N x n) @ (n x n_G)
products and the per-element inverse maps are applied either as N batched
matrix-vector products or as a broadcast multiply over a new n_S axis
followed by a sum over n_G.
"""
from __future__ import annotations

import enum

import numpy as np

from ..basis import psi_table
from .maps import InverseMapTable, stress_tables
from .params import StressState, VPParams


class TensorStrategy(enum.Enum):
    BATCHED_MATVEC = "bmm"
    MULTIPLY_REDUCE = "sum"


def _apply_maps(maps: np.ndarray, rhs: np.ndarray, strategy: TensorStrategy) -> np.ndarray:
    if strategy is TensorStrategy.BATCHED_MATVEC:
        return np.matmul(maps, rhs[:, :, None])[:, :, 0]
    return (maps * rhs[:, None, :]).sum(axis=2)


def _vp_rhs(state: StressState, params: VPParams, scale: float):
    """Gauss-point right-hand sides (r11, r12, r22), each (N, n_G)."""
    dtype = state.precision.dtype
    rule, table_s = stress_tables(state.n_S)
    psi_s = table_s.values.astype(dtype)
    psi_a = psi_table(state.n_A, rule.ngp).values.astype(dtype)
    c = dict(zip("pstar dmin cexp scale".split(),
                 np.array([params.Pstar, params.DeltaMin, params.C, scale], dtype)))
    h = np.maximum(dtype.type(0), state.H.values @ psi_a)
    a = np.clip(state.A.values @ psi_a, dtype.type(0), dtype.type(1))
    e11 = state.E11.values @ psi_s
    e12 = state.E12.values @ psi_s
    e22 = state.E22.values @ psi_s
    P = c["pstar"] * h * np.exp(-c["cexp"] * (dtype.type(1) - a))
    D = np.sqrt(c["dmin"] * c["dmin"] + dtype.type(1.25) * (e11 * e11 + e22 * e22)
                + dtype.type(1.5) * e11 * e22 + e12 * e12)
    PD = P / D
    half = dtype.type(0.5)
    r11 = c["scale"] * (PD * (dtype.type(0.625) * e11 + dtype.type(0.375) * e22) - half * P)
    r12 = c["scale"] * (PD * dtype.type(0.25) * e12)
    r22 = c["scale"] * (PD * (dtype.type(0.625) * e22 + dtype.type(0.375) * e11) - half * P)
    return r11, r12, r22


def _check_maps(state: StressState, maps: InverseMapTable) -> np.ndarray:
    if maps is None:
        raise ValueError("the tensorized update needs precomputed inverse maps")
    expected = (state.n_elements, state.n_S)
    if maps.data.shape[:2] != expected:
        raise ValueError(f"inverse map table has shape {maps.data.shape}, "
                         f"expected {expected + (maps.n_G,)}")
    return maps.astype(state.precision.dtype)


def tensorized_stress_update(state: StressState, maps: InverseMapTable,
                             params: VPParams,
                             strategy: TensorStrategy = TensorStrategy.MULTIPLY_REDUCE) -> None:
    state.validate()
    strategy = TensorStrategy(strategy)
    m = _check_maps(state, maps)
    dtype = state.precision.dtype
    alpha_inv = 1.0 / params.alpha
    fac = dtype.type(1.0 - alpha_inv)
    for field, rhs in zip(state.stresses, _vp_rhs(state, params, alpha_inv)):
        field.values[...] = fac * field.values + _apply_maps(m, rhs, strategy)


def vp_stress_target(state: StressState, maps: InverseMapTable,
                     params: VPParams) -> np.ndarray:
    """Fixed point of the relaxation: projected viscous-plastic stress (3, N, n_S)."""
    m = _check_maps(state, maps)
    return np.stack([_apply_maps(m, rhs, TensorStrategy.BATCHED_MATVEC)
                     for rhs in _vp_rhs(state, params, 1.0)])
