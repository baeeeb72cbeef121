"""Extended-precision reference for the stress update.

Shares no numerics with the production kernels: Gauss points come from
closed forms, the basis is evaluated from its monomial exponents, Jacobians
are recomputed from the corners, and each local projection is solved by a
long-double Cholesky factorisation. Work is vectorised over elements only;
every sum over local indices is an explicit loop in long double.
"""
from __future__ import annotations

import numpy as np

from ..basis import MONOMIALS, ngp_for_dofs
from ..fields import DGField, Precision, StorageLayout
from ..mesh import Mesh
from .params import StressState, VPParams

LD = np.longdouble


def _gauss_1d(ngp: int):
    half = LD(1) / LD(2)
    if ngp == 1:
        return [half], [LD(1)]
    if ngp == 2:
        d = half / np.sqrt(LD(3))
        return [half - d, half + d], [half, half]
    if ngp == 3:
        d = half * np.sqrt(LD(3) / LD(5))
        return [half - d, half, half + d], [LD(5) / LD(18), LD(8) / LD(18), LD(5) / LD(18)]
    raise ValueError(f"unsupported number of Gauss points: {ngp}")


def _gauss_2d(ngp: int):
    p, w = _gauss_1d(ngp)
    pts = [(p[gx], p[gy]) for gy in range(ngp) for gx in range(ngp)]
    wts = [w[gx] * w[gy] for gy in range(ngp) for gx in range(ngp)]
    return pts, wts


def _basis(n: int, pts) -> list[list]:
    half = LD(1) / LD(2)
    return [[(s - half) ** a * (t - half) ** b for (s, t) in pts] for a, b in MONOMIALS[:n]]


def _solve_spd(mass, rhs):
    """Solve mass[e] c[e] = rhs[e] for every element; mass is a list of lists."""
    n = len(rhs)
    L = [[None] * n for _ in range(n)]
    for j in range(n):
        d = mass[j][j].copy()
        for k in range(j):
            d -= L[j][k] * L[j][k]
        if np.any(d <= 0):
            raise ValueError("local mass matrix is not positive definite")
        L[j][j] = np.sqrt(d)
        for r in range(j + 1, n):
            v = mass[r][j].copy()
            for k in range(j):
                v -= L[r][k] * L[j][k]
            L[r][j] = v / L[j][j]
    y = [None] * n
    for j in range(n):
        v = rhs[j].copy()
        for k in range(j):
            v -= L[j][k] * y[k]
        y[j] = v / L[j][j]
    c = [None] * n
    for j in range(n - 1, -1, -1):
        v = y[j].copy()
        for k in range(j + 1, n):
            v -= L[k][j] * c[k]
        c[j] = v / L[j][j]
    return c


def stress_update_reference(state: StressState, mesh: Mesh,
                            params: VPParams) -> tuple[DGField, DGField, DGField]:
    """One stress update computed from scratch; returns fresh F64 row-major fields."""
    state.validate()
    if mesh.n_elements != state.n_elements:
        raise ValueError(f"mesh has {mesh.n_elements} elements, "
                         f"state has {state.n_elements}")
    n_s, n_a = state.n_S, state.n_A
    ngp = ngp_for_dofs(n_s)
    pts, wts = _gauss_2d(ngp)
    ng = len(pts)
    psi_s = _basis(n_s, pts)
    psi_a = _basis(n_a, pts)

    def cols(field):
        v = field.values.astype(LD)
        return [v[:, j].copy() for j in range(v.shape[1])]

    S11, S12, S22, E11, E12, E22, H, A = (
        cols(getattr(state, n)) for n in ("S11", "S12", "S22", "E11", "E12", "E22", "H", "A"))

    corners = mesh.corners().astype(LD)
    x = [corners[:, k, 0] for k in range(4)]
    y = [corners[:, k, 1] for k in range(4)]

    zero, one = LD(0), LD(1)
    pstar, dmin = LD(params.Pstar), LD(params.DeltaMin)
    alpha, cexp = LD(params.alpha), LD(params.C)

    wj = []
    r11, r12, r22 = [], [], []
    for g, (s, t) in enumerate(pts):
        dxds = (x[1] - x[0]) * (one - t) + (x[3] - x[2]) * t
        dyds = (y[1] - y[0]) * (one - t) + (y[3] - y[2]) * t
        dxdt = (x[2] - x[0]) * (one - s) + (x[3] - x[1]) * s
        dydt = (y[2] - y[0]) * (one - s) + (y[3] - y[1]) * s
        det = dxds * dydt - dyds * dxdt
        if np.any(det <= 0):
            raise ValueError("degenerate element: non-positive Jacobian")
        wj.append(wts[g] * det)

        hv = sum((H[j] * psi_a[j][g] for j in range(n_a)), zero)
        av = sum((A[j] * psi_a[j][g] for j in range(n_a)), zero)
        hv = np.maximum(hv, zero)
        av = np.minimum(np.maximum(av, zero), one)
        e11 = sum((E11[j] * psi_s[j][g] for j in range(n_s)), zero)
        e12 = sum((E12[j] * psi_s[j][g] for j in range(n_s)), zero)
        e22 = sum((E22[j] * psi_s[j][g] for j in range(n_s)), zero)
        P = pstar * hv * np.exp(-cexp * (one - av))
        D = np.sqrt(dmin * dmin + LD(5) / 4 * (e11 * e11 + e22 * e22)
                    + LD(3) / 2 * e11 * e22 + e12 * e12)
        PD = P / D
        r11.append(PD * (LD(5) / 8 * e11 + LD(3) / 8 * e22) - P / 2)
        r12.append(PD * e12 / 4)
        r22.append(PD * (LD(5) / 8 * e22 + LD(3) / 8 * e11) - P / 2)

    mass = [[sum((wj[g] * psi_s[j][g] * psi_s[k][g] for g in range(ng)), zero)
             for k in range(n_s)] for j in range(n_s)]
    out = []
    for S, r in ((S11, r11), (S12, r12), (S22, r22)):
        b = [sum((wj[g] * psi_s[j][g] * r[g] for g in range(ng)), zero) for j in range(n_s)]
        proj = _solve_spd(mass, b)
        new = np.stack([(one - one / alpha) * S[j] + proj[j] / alpha for j in range(n_s)],
                       axis=1)
        out.append(DGField.from_rows(new.astype(np.float64), StorageLayout.ROW,
                                     Precision.F64))
    return tuple(out)


def relative_max_deviation(fields, reference) -> float:
    """max |a - b| over all given fields, divided by max |b| over the same fields."""
    num = max(np.abs(a.values.astype(np.float64) - b.values.astype(np.float64)).max()
              for a, b in zip(fields, reference))
    den = max(np.abs(b.values.astype(np.float64)).max() for b in reference)
    if den == 0.0:
        return float(num)
    return float(num / den)
