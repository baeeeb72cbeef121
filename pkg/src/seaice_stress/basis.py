"""Gauss quadrature and dG basis tables on the reference square [0, 1]^2.

The local basis is the centred monomial family in ``S = s - 1/2`` and
``T = t - 1/2``:

    n=1: 1
    n=3: 1, S, T
    n=6: 1, S, T, S^2, T^2, ST
    n=8: 1, S, T, S^2, T^2, ST, S^2 T, S T^2

Tensor Gauss points are ordered x-fastest, ``g = gy * ngp + gx``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fields import DGField, Precision, StorageLayout
from .mesh import Mesh, corner_jacobian_dets, shape_functions

SUPPORTED_NGP = (1, 2, 3)
SUPPORTED_NLOCAL = (1, 3, 6, 8)
STRESS_DOFS = (3, 8)
ADVECTION_DOFS = (1, 3, 6)

# (power of S, power of T) per basis function
MONOMIALS = ((0, 0), (1, 0), (0, 1), (2, 0), (0, 2), (1, 1), (2, 1), (1, 2))


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    ngp: int
    points_1d: np.ndarray
    weights_1d: np.ndarray

    @property
    def n_g(self) -> int:
        return self.ngp * self.ngp

    @functools.cached_property
    def points(self) -> np.ndarray:
        """(n_g, 2) tensor points, x-fastest."""
        gy, gx = np.meshgrid(self.points_1d, self.points_1d, indexing="ij")
        pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
        pts.setflags(write=False)
        return pts

    @functools.cached_property
    def weights(self) -> np.ndarray:
        w = np.outer(self.weights_1d, self.weights_1d).ravel()
        w.setflags(write=False)
        return w


@dataclass(frozen=True, eq=False)
class BasisTable:
    n_local: int
    ngp: int
    values: np.ndarray  # (n_local, n_g); entry (j, g) = psi_j(x_g)

    @property
    def n_g(self) -> int:
        return self.ngp * self.ngp

    @property
    def nbytes(self) -> int:
        return self.values.size * 8


@functools.lru_cache(maxsize=None)
def gauss_rule(ngp: int) -> QuadratureRule:
    """Gauss-Legendre rule with ``ngp`` points mapped to [0, 1]."""
    if ngp not in SUPPORTED_NGP:
        raise ValueError(f"unsupported number of Gauss points: {ngp}")
    x, w = np.polynomial.legendre.leggauss(ngp)
    pts = 0.5 * (x + 1.0)
    wts = 0.5 * w
    pts.setflags(write=False)
    wts.setflags(write=False)
    return QuadratureRule(ngp, pts, wts)


def ngp_for_dofs(n_s: int) -> int:
    """Points per direction used by the stress update for ``n_s`` stress DOFs."""
    if n_s == 3:
        return 2
    if n_s == 8:
        return 3
    raise ValueError(f"unsupported stress space with {n_s} local DOFs")


def eval_basis(n_local: int, s, t) -> np.ndarray:
    """Basis values (n_local, P) at reference points ``s``, ``t``."""
    if n_local not in SUPPORTED_NLOCAL:
        raise ValueError(f"unsupported number of local DOFs: {n_local}")
    S = np.asarray(s, dtype=np.float64) - 0.5
    T = np.asarray(t, dtype=np.float64) - 0.5
    return np.stack([S**a * T**b for a, b in MONOMIALS[:n_local]])


@functools.lru_cache(maxsize=None)
def psi_table(n_local: int, ngp: int) -> BasisTable:
    rule = gauss_rule(ngp)
    pts = rule.points
    values = eval_basis(n_local, pts[:, 0], pts[:, 1])
    values.setflags(write=False)
    return BasisTable(n_local, ngp, values)


def supported_tables() -> list[BasisTable]:
    return [psi_table(n, g) for n in SUPPORTED_NLOCAL for g in SUPPORTED_NGP]


def table_bytes() -> int:
    """Total size of every supported PSI table at 8 bytes per entry."""
    return sum(t.nbytes for t in supported_tables())


def evaluate_at_gauss(row, table: BasisTable) -> np.ndarray:
    row = np.asarray(row)
    if row.shape[-1] != table.n_local:
        raise ValueError(
            f"row has {row.shape[-1]} coefficients, table expects {table.n_local}")
    return row @ table.values


def project_function(mesh: Mesh, table: BasisTable, rule: QuadratureRule,
                     f: Callable[[np.ndarray, np.ndarray], np.ndarray],
                     layout: StorageLayout = StorageLayout.ROW,
                     precision: Precision = Precision.F64,
                     chunk: int = 65536) -> DGField:
    """Element-wise L2 projection of ``f(x, y)`` onto the dG space.

    Solves ``M_i c = sum_g w_g |J_i(x_g)| f(x_g) psi(x_g)`` per element, with
    the local mass matrix assembled by the same quadrature rule.
    """
    if table.ngp != rule.ngp:
        raise ValueError("basis table and quadrature rule use different ngp")
    out = DGField(mesh.n_elements, table.n_local, layout, precision)
    ref = rule.points
    psi = table.values
    w = rule.weights
    phi = shape_functions(ref[:, 0], ref[:, 1])
    corners = mesh.corners()
    for lo in range(0, mesh.n_elements, chunk):
        c = corners[lo:lo + chunk]
        xg = np.einsum("pk,ekd->epd", phi, c)
        wj = w * corner_jacobian_dets(c, ref[:, 0], ref[:, 1])
        if np.any(wj <= 0):
            raise ValueError("degenerate element: non-positive Jacobian")
        fg = np.broadcast_to(f(xg[..., 0], xg[..., 1]), wj.shape)
        mass = np.einsum("jg,eg,kg->ejk", psi, wj, psi)
        rhs = np.einsum("jg,eg->ej", psi, wj * fg)
        try:
            coef = np.linalg.solve(mass, rhs[..., None])[..., 0]
        except np.linalg.LinAlgError as exc:
            raise ValueError("singular local mass matrix") from exc
        out.values[lo:lo + chunk] = coef
    return out
