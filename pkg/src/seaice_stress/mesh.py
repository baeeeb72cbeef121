"""Structured quadrilateral meshes with bilinear element geometry.

Elements are numbered row-major over the grid, ``i = iy * nx + ix``. Each
element's corners are stored in the order (bottom-left, bottom-right,
top-left, top-right), matching the bilinear shape functions

    phi0 = (1-s)(1-t), phi1 = s(1-t), phi2 = (1-s)t, phi3 = st

on the reference square [0, 1]^2.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

MAX_DISTORTION = 0.3

# Phase increments of the vertex perturbation; both are <= pi/3 so the
# displacement difference across any edge is at most distortion * h.
_PHASE_X = np.pi / 3.0
_PHASE_Y = np.pi / 4.0


class ElementQuad(NamedTuple):
    v0: tuple[float, float]
    v1: tuple[float, float]
    v2: tuple[float, float]
    v3: tuple[float, float]

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class Mesh:
    nx: int
    ny: int
    extent_x: float
    extent_y: float
    vertices: np.ndarray  # ((ny+1)*(nx+1), 2), vertex k = jy*(nx+1) + jx
    distortion: float = 0.0

    @property
    def n_elements(self) -> int:
        return self.nx * self.ny

    @property
    def n_vertices(self) -> int:
        return (self.nx + 1) * (self.ny + 1)

    @property
    def spacing(self) -> tuple[float, float]:
        return self.extent_x / self.nx, self.extent_y / self.ny

    def corners(self) -> np.ndarray:
        """(N, 4, 2) array of element corner coordinates."""
        c = getattr(self, "_corners", None)
        if c is None:
            grid = self.vertices.reshape(self.ny + 1, self.nx + 1, 2)
            c = np.empty((self.ny, self.nx, 4, 2))
            c[:, :, 0] = grid[:-1, :-1]
            c[:, :, 1] = grid[:-1, 1:]
            c[:, :, 2] = grid[1:, :-1]
            c[:, :, 3] = grid[1:, 1:]
            c = c.reshape(self.n_elements, 4, 2)
            c.setflags(write=False)
            object.__setattr__(self, "_corners", c)
        return c

    def map_points(self, ref_points: np.ndarray) -> np.ndarray:
        """Physical coordinates (N, P, 2) of reference points (P, 2)."""
        phi = shape_functions(ref_points[:, 0], ref_points[:, 1])  # (P, 4)
        return np.einsum("pk,ekd->epd", phi, self.corners())

    def jacobian_dets(self, ref_points: np.ndarray) -> np.ndarray:
        """Jacobian determinants (N, P) at reference points (P, 2)."""
        return corner_jacobian_dets(self.corners(), ref_points[:, 0], ref_points[:, 1])


def shape_functions(s, t) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    return np.stack([(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t],
                    axis=-1)


def corner_jacobian_dets(corners: np.ndarray, s, t) -> np.ndarray:
    v0, v1, v2, v3 = (corners[..., k, None, :] for k in range(4))
    s = np.asarray(s)[..., None]
    t = np.asarray(t)[..., None]
    dxds = (v1 - v0) * (1 - t) + (v3 - v2) * t
    dxdt = (v2 - v0) * (1 - s) + (v3 - v1) * s
    return dxds[..., 0] * dxdt[..., 1] - dxds[..., 1] * dxdt[..., 0]


def build_structured_mesh(nx: int, ny: int, extent_x: float, extent_y: float,
                          distortion: float = 0.0) -> Mesh:
    """Uniform nx x ny grid, optionally with smoothly perturbed interior vertices.

    Interior vertex (jx, jy) moves by ``distortion * (hx sin p, hy cos p)``
    with phase ``p = jx*pi/3 + jy*pi/4``; boundary vertices stay put. The
    corner Jacobians are then bounded below by ``(1 - 2*distortion) hx hy``.
    """
    if nx < 1 or ny < 1:
        raise ValueError(f"element counts must be positive, got {nx}x{ny}")
    if not (extent_x > 0 and extent_y > 0):
        raise ValueError("domain extents must be positive")
    if not 0.0 <= distortion < MAX_DISTORTION:
        raise ValueError(
            f"distortion must lie in [0, {MAX_DISTORTION}), got {distortion}")
    hx, hy = extent_x / nx, extent_y / ny
    jy, jx = np.meshgrid(np.arange(ny + 1), np.arange(nx + 1), indexing="ij")
    x = jx * hx
    y = jy * hy
    # pin the far boundary exactly to the extent
    x[:, -1] = extent_x
    y[-1, :] = extent_y
    if distortion > 0.0:
        interior = (jx > 0) & (jx < nx) & (jy > 0) & (jy < ny)
        phase = jx * _PHASE_X + jy * _PHASE_Y
        x = np.where(interior, x + distortion * hx * np.sin(phase), x)
        y = np.where(interior, y + distortion * hy * np.cos(phase), y)
    vertices = np.stack([x.ravel(), y.ravel()], axis=1).astype(np.float64)
    vertices.setflags(write=False)
    return Mesh(int(nx), int(ny), float(extent_x), float(extent_y), vertices,
                float(distortion))


def element_vertices(mesh: Mesh, i: int) -> ElementQuad:
    if not 0 <= i < mesh.n_elements:
        raise IndexError(
            f"element index {i} out of range [0, {mesh.n_elements})")
    c = mesh.corners()[i]
    return ElementQuad(*(tuple(float(v) for v in c[k]) for k in range(4)))


def jacobian_det_at(quad: ElementQuad, ref_point: tuple[float, float]) -> float:
    """Determinant of d(x, y)/d(s, t) of the bilinear map at ``ref_point``."""
    s, t = ref_point
    return corner_jacobian_dets(np.asarray(quad, dtype=np.float64), s, t).item()
