"""Synthetic inputs for the stress update.

``UNIFORM`` is compact ice at rest: H = 1, A = 1, zero strain and zero
initial stress. ``VORTEX`` is a smooth cyclone-like state centred in the
domain: Gaussian bumps of ice height and concentration, and the strain rate
of the velocity field

    v = g(r) * (omega * (-(y - yc), x - xc) - kappa * (x - xc, y - yc)),
    g(r) = exp(-r^2 / (2 L^2)),

a rotation with a weak convergent inflow, with ``E = (grad v + grad v^T)/2``
evaluated analytically and projected onto the stress space.
"""
from __future__ import annotations

import enum

import numpy as np

from ..basis import gauss_rule, ngp_for_dofs, project_function, psi_table
from ..fields import DGField, Precision, StorageLayout
from ..mesh import Mesh
from .params import StressState


class Scenario(enum.Enum):
    UNIFORM = "uniform"
    VORTEX = "vortex"


VORTEX_OMEGA = 1e-5  # 1/s
VORTEX_KAPPA = 2e-6  # 1/s


def vortex_strain(mesh: Mesh, omega: float = VORTEX_OMEGA, kappa: float = VORTEX_KAPPA):
    """Analytic strain-rate components ``(e11, e12, e22)`` as functions of (x, y)."""
    xc, yc = 0.5 * mesh.extent_x, 0.5 * mesh.extent_y
    L = 0.25 * min(mesh.extent_x, mesh.extent_y)

    def parts(x, y):
        dx, dy = x - xc, y - yc
        g = np.exp(-(dx * dx + dy * dy) / (2 * L * L))
        return dx, dy, g

    def e11(x, y):
        dx, dy, g = parts(x, y)
        return g * (omega * dx * dy / L**2 - kappa * (1 - dx * dx / L**2))

    def e22(x, y):
        dx, dy, g = parts(x, y)
        return g * (-omega * dx * dy / L**2 - kappa * (1 - dy * dy / L**2))

    def e12(x, y):
        dx, dy, g = parts(x, y)
        return g * (0.5 * omega * (dy * dy - dx * dx) / L**2 + kappa * dx * dy / L**2)

    return e11, e12, e22


def _vortex_tracers(mesh: Mesh):
    xc, yc = 0.5 * mesh.extent_x, 0.5 * mesh.extent_y
    L = 0.3 * min(mesh.extent_x, mesh.extent_y)

    def r2(x, y):
        return ((x - xc) ** 2 + (y - yc) ** 2) / L**2

    def height(x, y):
        return 0.3 + 0.7 * np.exp(-r2(x, y))

    def concentration(x, y):
        return 0.85 + 0.15 * np.exp(-0.5 * r2(x, y))

    return height, concentration


def synth_fields(mesh: Mesh, n_A: int, n_S: int,
                 scenario: Scenario = Scenario.VORTEX,
                 precision: Precision = Precision.F64,
                 layout: StorageLayout = StorageLayout.ROW) -> StressState:
    scenario = Scenario(scenario)
    N = mesh.n_elements

    def const(n, value):
        f = DGField(N, n, layout, Precision.F64)
        f.values[:, 0] = value
        return f

    if scenario is Scenario.UNIFORM:
        fields = dict(H=const(n_A, 1.0), A=const(n_A, 1.0),
                      E11=const(n_S, 0.0), E12=const(n_S, 0.0), E22=const(n_S, 0.0))
    else:
        ngp = ngp_for_dofs(n_S)
        rule = gauss_rule(ngp)
        table_a, table_s = psi_table(n_A, ngp), psi_table(n_S, ngp)
        height, conc = _vortex_tracers(mesh)
        e11, e12, e22 = vortex_strain(mesh)
        fields = dict(H=project_function(mesh, table_a, rule, height, layout),
                      A=project_function(mesh, table_a, rule, conc, layout),
                      E11=project_function(mesh, table_s, rule, e11, layout),
                      E12=project_function(mesh, table_s, rule, e12, layout),
                      E22=project_function(mesh, table_s, rule, e22, layout))
    for name in ("S11", "S12", "S22"):
        fields[name] = const(n_S, 0.0)
    state = StressState(**fields)
    if precision is not Precision.F64:
        state = state.astype(precision)
    return state


def random_state(n_elements: int, n_A: int, n_S: int, rng: np.random.Generator,
                 layout: StorageLayout = StorageLayout.ROW,
                 precision: Precision = Precision.F64,
                 strain_scale: float = 1e-6, stress_scale: float = 1e4) -> StressState:
    """Random coefficients; H and A overshoot [0, 1] so clamping is exercised."""
    def field(n, values):
        return DGField.from_rows(values, layout, precision)

    def tracer():
        rows = np.zeros((n_elements, n_A))
        rows[:, 0] = rng.uniform(-0.2, 1.2, n_elements)
        rows[:, 1:] = rng.normal(0.0, 0.3, (n_elements, n_A - 1))
        return field(n_A, rows)

    return StressState(
        S11=field(n_S, rng.normal(0, stress_scale, (n_elements, n_S))),
        S12=field(n_S, rng.normal(0, stress_scale, (n_elements, n_S))),
        S22=field(n_S, rng.normal(0, stress_scale, (n_elements, n_S))),
        E11=field(n_S, rng.normal(0, strain_scale, (n_elements, n_S))),
        E12=field(n_S, rng.normal(0, strain_scale, (n_elements, n_S))),
        E22=field(n_S, rng.normal(0, strain_scale, (n_elements, n_S))),
        H=tracer(), A=tracer())
