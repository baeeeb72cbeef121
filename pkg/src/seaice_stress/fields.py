"""Per-element dG coefficient fields with a runtime storage layout.

A field holds ``n_elements * n_local`` scalars. With ``StorageLayout.ROW`` the
coefficients of one element are contiguous; with ``StorageLayout.COL``
coefficient ``k`` of every element is contiguous. Logical access is always
``(element, k)`` through :attr:`DGField.values`, a strided 2D view, so the
kernels never branch on layout.
"""
from __future__ import annotations

import enum

import numpy as np

# N*n must be addressable with 32-bit signed indices.
MAX_ENTRIES = 2**31 - 1


class StorageLayout(enum.Enum):
    ROW = "row"
    COL = "col"


class Precision(enum.Enum):
    F64 = "f64"
    F32 = "f32"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.float64 if self is Precision.F64 else np.float32)

    @classmethod
    def of(cls, dtype) -> "Precision":
        dtype = np.dtype(dtype)
        if dtype == np.float64:
            return cls.F64
        if dtype == np.float32:
            return cls.F32
        raise ValueError(f"unsupported dtype {dtype}")


class DGField:
    """N x n matrix of dG coefficients, one logical row per mesh element."""

    __slots__ = ("n_elements", "n_local", "layout", "precision", "data")

    def __init__(self, n_elements: int, n_local: int, layout: StorageLayout,
                 precision: Precision, data: np.ndarray | None = None):
        if n_elements < 1 or n_local < 1:
            raise ValueError(
                f"field dimensions must be positive, got {n_elements}x{n_local}")
        if n_elements * n_local > MAX_ENTRIES:
            raise ValueError(
                f"{n_elements}x{n_local} entries overflow 32-bit indexing")
        self.n_elements = int(n_elements)
        self.n_local = int(n_local)
        self.layout = StorageLayout(layout)
        self.precision = Precision(precision)
        size = self.n_elements * self.n_local
        if data is None:
            data = np.zeros(size, dtype=self.precision.dtype)
        elif data.shape != (size,) or data.dtype != self.precision.dtype:
            raise ValueError(
                f"buffer must be 1D {self.precision.dtype} of length {size}")
        self.data = data

    @classmethod
    def from_rows(cls, rows, layout: StorageLayout = StorageLayout.ROW,
                  precision: Precision = Precision.F64) -> "DGField":
        """Build a field from a logical (N, n) array."""
        rows = np.asarray(rows)
        if rows.ndim != 2:
            raise ValueError("rows must be a 2D array")
        field = cls(rows.shape[0], rows.shape[1], layout, precision)
        field.values[...] = rows
        return field

    @property
    def values(self) -> np.ndarray:
        """Writable (N, n) view; C-contiguous for ROW, F-contiguous for COL."""
        if self.layout is StorageLayout.ROW:
            return self.data.reshape(self.n_elements, self.n_local)
        return self.data.reshape(self.n_local, self.n_elements).T

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_elements, self.n_local

    def _check_index(self, i: int) -> int:
        if not 0 <= i < self.n_elements:
            raise IndexError(
                f"element index {i} out of range [0, {self.n_elements})")
        return int(i)

    def copy(self) -> "DGField":
        return DGField(self.n_elements, self.n_local, self.layout,
                       self.precision, self.data.copy())

    def astype(self, precision: Precision) -> "DGField":
        precision = Precision(precision)
        return DGField(self.n_elements, self.n_local, self.layout, precision,
                       self.data.astype(precision.dtype))

    def __repr__(self) -> str:
        return (f"DGField(N={self.n_elements}, n={self.n_local}, "
                f"layout={self.layout.value}, precision={self.precision.value})")


def create_field(n_elements: int, n_local: int,
                 layout: StorageLayout = StorageLayout.ROW,
                 precision: Precision = Precision.F64,
                 fill: float = 0.0) -> DGField:
    field = DGField(n_elements, n_local, layout, precision)
    field.data.fill(fill)
    return field


def get_element_row(field: DGField, i: int) -> np.ndarray:
    """Copy of logical row ``i``; identical for either layout."""
    return field.values[field._check_index(i)].copy()


def set_element_row(field: DGField, i: int, row) -> None:
    row = np.asarray(row)
    if row.shape != (field.n_local,):
        raise ValueError(
            f"row must have {field.n_local} entries, got shape {row.shape}")
    field.values[field._check_index(i)] = row


def convert_layout(field: DGField, target: StorageLayout) -> DGField:
    """Return a new field with the same logical content stored in ``target``."""
    target = StorageLayout(target)
    out = DGField(field.n_elements, field.n_local, target, field.precision)
    out.values[...] = field.values
    return out


def max_abs_diff(a: DGField, b: DGField) -> float:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = np.abs(a.values.astype(np.float64) - b.values.astype(np.float64))
    return float(diff.max())
