"""Per-element inverse maps: inverse local mass matrix times weighted basis.

For element ``i`` with Gauss weights ``w_g`` and Jacobians ``|J_i(x_g)|``

    B_i[j, g] = w_g |J_i(x_g)| psi_j(x_g)
    M_i[j, k] = sum_g B_i[j, g] psi_k(x_g)
    map_i     = M_i^{-1} B_i            (n_S x n_G)

Multiplying ``map_i`` by Gauss-point values of a function yields the dG
coefficients of its L2 projection. Precomputed tables and the on-the-fly
kernel path both call :func:`inverse_map_into`, so they agree bit-for-bit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..basis import BasisTable, QuadratureRule, gauss_rule, ngp_for_dofs, psi_table
from ..mesh import ElementQuad, Mesh


class DegenerateElementError(ValueError):
    pass


@njit(nogil=True, cache=True)
def inverse_map_into(quad, psi, pts, w, mass, out):
    """Write map_i for the corners ``quad`` (4, 2) into ``out``.

    ``mass`` is (n, n) scratch. Returns the smallest Jacobian determinant
    seen at the Gauss points; the result is only meaningful if that is > 0.
    """
    n, ng = psi.shape
    x0, y0 = quad[0, 0], quad[0, 1]
    x1, y1 = quad[1, 0], quad[1, 1]
    x2, y2 = quad[2, 0], quad[2, 1]
    x3, y3 = quad[3, 0], quad[3, 1]
    detmin = np.inf
    for g in range(ng):
        s = pts[g, 0]
        t = pts[g, 1]
        dxds = (x1 - x0) * (1.0 - t) + (x3 - x2) * t
        dyds = (y1 - y0) * (1.0 - t) + (y3 - y2) * t
        dxdt = (x2 - x0) * (1.0 - s) + (x3 - x1) * s
        dydt = (y2 - y0) * (1.0 - s) + (y3 - y1) * s
        det = dxds * dydt - dyds * dxdt
        if det < detmin:
            detmin = det
        wj = w[g] * det
        for j in range(n):
            out[j, g] = wj * psi[j, g]
    if not detmin > 0.0:
        return detmin
    for j in range(n):
        for k in range(j + 1):
            acc = 0.0
            for g in range(ng):
                acc += out[j, g] * psi[k, g]
            mass[j, k] = acc
    # in-place Cholesky, lower triangle
    for j in range(n):
        d = mass[j, j]
        for k in range(j):
            d -= mass[j, k] * mass[j, k]
        if not d > 0.0:
            return -1.0
        d = np.sqrt(d)
        mass[j, j] = d
        for r in range(j + 1, n):
            v = mass[r, j]
            for k in range(j):
                v -= mass[r, k] * mass[j, k]
            mass[r, j] = v / d
    for g in range(ng):
        for j in range(n):
            v = out[j, g]
            for k in range(j):
                v -= mass[j, k] * out[k, g]
            out[j, g] = v / mass[j, j]
        for j in range(n - 1, -1, -1):
            v = out[j, g]
            for k in range(j + 1, n):
                v -= mass[k, j] * out[k, g]
            out[j, g] = v / mass[j, j]
    return detmin


@njit(nogil=True, cache=True)
def _precompute(corners, psi, pts, w, out):
    n = psi.shape[0]
    mass = np.empty((n, n))
    for i in range(corners.shape[0]):
        if not inverse_map_into(corners[i], psi, pts, w, mass, out[i]) > 0.0:
            return i
    return -1


@dataclass(frozen=True, eq=False)
class InverseMapTable:
    n_elements: int
    n_S: int
    n_G: int
    data: np.ndarray  # (N, n_S, n_G) float64

    def astype(self, dtype) -> np.ndarray:
        """The table in the working precision of a kernel call."""
        if self.data.dtype == dtype:
            return self.data
        cache = self.__dict__.setdefault("_cast", {})
        key = np.dtype(dtype).str
        if key not in cache:
            cache[key] = np.ascontiguousarray(self.data, dtype=dtype)
        return cache[key]

    @property
    def nbytes(self) -> int:
        return self.data.nbytes


def stress_tables(n_S: int) -> tuple[QuadratureRule, BasisTable]:
    ngp = ngp_for_dofs(n_S)
    return gauss_rule(ngp), psi_table(n_S, ngp)


def _check_consistent(n_S, rule, table_S):
    if table_S.n_local != n_S:
        raise ValueError(f"basis table has {table_S.n_local} DOFs, expected {n_S}")
    if table_S.ngp != rule.ngp:
        raise ValueError("basis table and quadrature rule use different ngp")
    ngp_for_dofs(n_S)


def precompute_inverse_maps(mesh: Mesh, n_S: int, rule: QuadratureRule | None = None,
                            table_S: BasisTable | None = None) -> InverseMapTable:
    if rule is None or table_S is None:
        rule, table_S = stress_tables(n_S)
    _check_consistent(n_S, rule, table_S)
    data = np.empty((mesh.n_elements, n_S, rule.n_g))
    bad = _precompute(np.ascontiguousarray(mesh.corners()),
                      np.ascontiguousarray(table_S.values), rule.points,
                      rule.weights, data)
    if bad >= 0:
        raise DegenerateElementError(f"element {bad} has a non-positive Jacobian")
    return InverseMapTable(mesh.n_elements, n_S, rule.n_g, data)


def element_inverse_map(quad: ElementQuad | np.ndarray, n_S: int,
                        rule: QuadratureRule | None = None,
                        table_S: BasisTable | None = None) -> np.ndarray:
    if rule is None or table_S is None:
        rule, table_S = stress_tables(n_S)
    _check_consistent(n_S, rule, table_S)
    out = np.empty((n_S, rule.n_g))
    mass = np.empty((n_S, n_S))
    det = inverse_map_into(np.asarray(quad, dtype=np.float64).reshape(4, 2),
                           np.ascontiguousarray(table_S.values), rule.points,
                           rule.weights, mass, out)
    if not det > 0.0:
        raise DegenerateElementError("element has a non-positive Jacobian")
    return out
