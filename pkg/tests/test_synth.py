import numpy as np
import pytest

from seaice_stress.basis import eval_basis
from seaice_stress.fields import Precision, StorageLayout
from seaice_stress.kernels import Scenario, synth_fields, vortex_strain
from seaice_stress.mesh import build_structured_mesh


def test_uniform_rows():
    mesh = build_structured_mesh(5, 4, 512e3, 512e3)
    state = synth_fields(mesh, 6, 8, Scenario.UNIFORM, layout=StorageLayout.COL)
    assert state.layout is StorageLayout.COL
    for f in (state.H, state.A):
        assert np.array_equal(f.values, np.tile([1, 0, 0, 0, 0, 0], (20, 1)))
    for f in (state.E11, state.E12, state.E22, *state.stresses):
        assert np.all(f.values == 0.0)


def test_vortex_tracers_in_range():
    mesh = build_structured_mesh(16, 16, 512e3, 512e3, 0.1)
    state = synth_fields(mesh, 3, 8, Scenario.VORTEX, precision=Precision.F32)
    assert state.precision is Precision.F32
    h0, a0 = state.H.values[:, 0], state.A.values[:, 0]
    assert np.all((h0 > 0.3) & (h0 <= 1.0))
    assert np.all((a0 > 0.85) & (a0 <= 1.0))
    assert np.all(state.S11.values == 0.0)


def test_vortex_strain_is_symmetric_part_of_gradient():
    mesh = build_structured_mesh(4, 4, 512e3, 512e3)
    e11, e12, e22 = vortex_strain(mesh)
    xc = yc = 256e3
    L = 128e3

    def v(x, y):
        dx, dy = x - xc, y - yc
        g = np.exp(-(dx * dx + dy * dy) / (2 * L * L))
        return g * (-1e-5 * dy - 2e-6 * dx), g * (1e-5 * dx - 2e-6 * dy)

    rng = np.random.default_rng(1)
    h = 1.0
    for x, y in rng.uniform(0, 512e3, (20, 2)):
        du = [(np.array(v(x + h, y)) - np.array(v(x - h, y))) / (2 * h),
              (np.array(v(x, y + h)) - np.array(v(x, y - h))) / (2 * h)]
        assert e11(x, y) == pytest.approx(du[0][0], abs=1e-13)
        assert e22(x, y) == pytest.approx(du[1][1], abs=1e-13)
        assert e12(x, y) == pytest.approx(0.5 * (du[1][0] + du[0][1]), abs=1e-13)


def projection_error(n):
    mesh = build_structured_mesh(n, n, 512e3, 512e3)
    state = synth_fields(mesh, 1, 8, Scenario.VORTEX)
    e11 = vortex_strain(mesh)[0]
    ref = np.array([[0.3, 0.7], [0.5, 0.5], [0.9, 0.2]])
    psi = eval_basis(8, ref[:, 0], ref[:, 1])
    got = state.E11.values @ psi
    x = mesh.map_points(ref)
    want = e11(x[..., 0], x[..., 1])
    return np.abs(got - want).max() / np.abs(want).max()


def test_vortex_projection_converges():
    coarse, fine = projection_error(32), projection_error(128)
    assert fine <= 1e-3
    assert fine < coarse / 8
