"""Acceptance suite: one test group per criterion, summarised at the end of the run."""
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from seaice_stress.basis import (ADVECTION_DOFS, STRESS_DOFS, SUPPORTED_NGP, eval_basis,
                                 gauss_rule, project_function, psi_table, table_bytes)
from seaice_stress.bench.harness import grid_shape
from seaice_stress.bench.report import read_csv
from seaice_stress.bench.verify import variant_results
from seaice_stress.fields import Precision, StorageLayout
from seaice_stress.kernels import (ExecPolicy, MapMode, Scenario, TensorStrategy, VPParams,
                                   gauss_diagnostics, mevp_relax, precompute_inverse_maps,
                                   random_state, relative_max_deviation, stress_update,
                                   stress_update_reference, synth_fields,
                                   tensorized_stress_update)
from seaice_stress.mesh import build_structured_mesh

PAIRS = [(a, s) for a in ADVECTION_DOFS for s in STRESS_DOFS]
EXTENT = 512e3


def grid_mesh(n, distortion=0.2):
    nx, ny = grid_shape(n)
    return build_structured_mesh(nx, ny, EXTENT, EXTENT, distortion)


# 1 -------------------------------------------------------------------------

@pytest.mark.criterion(1)
def test_oracle_equivalence_all_variants():
    params = VPParams()
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    count = 0
    for n in (1, 7, 1024, 16384):
        mesh = grid_mesh(n)
        for n_a, n_s in PAIRS:
            state = random_state(n, n_a, n_s, rng, stress_scale=params.Pstar / params.alpha)
            reference = stress_update_reference(state, mesh, params)
            for label, result in variant_results(state, mesh, params, workers=4):
                dev = relative_max_deviation(result.stresses, reference)
                assert dev <= 1e-12, f"N={n} ({n_a},{n_s}) {label}: {dev:.3e}"
                worst = max(worst, dev)
                count += 1
    elapsed = time.perf_counter() - t0
    print(f"{count} variant runs, worst deviation {worst:.2e}, {elapsed:.1f} s")
    assert count == 4 * 6 * 12
    assert elapsed < 60.0


# 2 -------------------------------------------------------------------------

@pytest.mark.criterion(2)
@pytest.mark.parametrize("alpha", [2.0, 100.0, 1500.0])
def test_affine_contraction(alpha):
    # Thin ice in open water with large residual stress: far from the fixed
    # point, so all 50 increments stay well above rounding level.
    rng = np.random.default_rng(2)
    mesh = grid_mesh(256)
    state = random_state(256, 3, 8, rng, stress_scale=1e4)
    state.H.values[:] = 0.0
    state.H.values[:, 0] = 1e-3
    state.A.values[:] = 0.0
    hist = mevp_relax(state, VPParams(alpha=alpha), 50,
                      maps=precompute_inverse_maps(mesh, 8))
    ratios = hist[1:] / hist[:-1]
    expected = 1.0 - 1.0 / alpha
    assert np.max(np.abs(ratios - expected)) <= 1e-10 * expected


# 3 -------------------------------------------------------------------------

@pytest.fixture(scope="module")
def determinism_case():
    rng = np.random.default_rng(3)
    mesh = grid_mesh(16384)
    state = random_state(16384, 3, 8, rng, stress_scale=20.0)
    maps = precompute_inverse_maps(mesh, 8)
    serial = state.copy()
    for _ in range(10):
        stress_update(serial, VPParams(), maps=maps)
    return mesh, state, maps, serial.stress_arrays()


@pytest.mark.criterion(3)
@pytest.mark.parametrize("layout", list(StorageLayout))
@pytest.mark.parametrize("workers", [1, 2, 4, 8])
@pytest.mark.parametrize("mode", list(MapMode))
def test_bit_identical(determinism_case, layout, workers, mode):
    mesh, state, maps, expected = determinism_case
    s = state.with_layout(layout)
    policy = ExecPolicy.threads(workers) if workers > 1 else ExecPolicy.serial()
    for _ in range(10):
        stress_update(s, VPParams(), maps=maps, mesh=mesh, mode=mode, policy=policy)
    assert np.array_equal(s.stress_arrays(), expected)


# 4 -------------------------------------------------------------------------

@pytest.mark.criterion(4)
@pytest.mark.parametrize("n_a, n_s", PAIRS)
def test_floor_and_clamps_randomized(n_a, n_s):
    rng = np.random.default_rng(4 + 10 * n_a + n_s)
    params = VPParams()
    n = 10_000
    state = random_state(n, n_a, n_s, rng)
    # per-case magnitudes spanning many decades, including exact zeros
    for f, lo, hi in ((state.H, -2, 2), (state.A, -2, 2), (state.E11, -14, 0),
                      (state.E12, -14, 0), (state.E22, -14, 0)):
        scale = 10.0 ** rng.uniform(lo, hi, n)
        scale[rng.random(n) < 0.05] = 0.0
        f.values[:] *= scale[:, None]
    h, a, P, D = gauss_diagnostics(state, params)
    assert np.all(D >= params.DeltaMin)
    assert np.all(h >= 0.0)
    assert np.all((a >= 0.0) & (a <= 1.0))
    assert np.all(np.isfinite(P)) and np.all(P >= 0.0)


# 5 -------------------------------------------------------------------------

@pytest.mark.criterion(5)
@pytest.mark.parametrize("ngp", SUPPORTED_NGP)
def test_monomial_exactness(ngp):
    rule = gauss_rule(ngp)
    s, t = rule.points[:, 0], rule.points[:, 1]
    for a in range(2 * ngp):
        for b in range(2 * ngp):
            got = np.sum(rule.weights * s**a * t**b)
            assert abs(got - 1.0 / ((a + 1) * (b + 1))) <= 1e-14


SPACE_POLYS = {
    1: lambda x, y: np.full_like(x, 2.5),
    3: lambda x, y: 2.5 - 0.7 * x + 1.3 * y,
    6: lambda x, y: 2.5 - 0.7 * x + 1.3 * y + 0.4 * x * x - 0.9 * y * y + 1.1 * x * y,
    8: lambda x, y: (2.5 - 0.7 * x + 1.3 * y + 0.4 * x * x - 0.9 * y * y + 1.1 * x * y
                     + 0.6 * x * x * y - 0.8 * x * y * y),
}


@pytest.mark.criterion(5)
@pytest.mark.parametrize("n_local, ngp", [(1, 1), (3, 2), (6, 3), (8, 3)])
def test_projection_reproduces_space_polynomials(n_local, ngp):
    mesh = build_structured_mesh(6, 4, 3.0, 2.0)
    f = SPACE_POLYS[n_local]
    coef = project_function(mesh, psi_table(n_local, ngp), gauss_rule(ngp), f).values
    ref = np.random.default_rng(5).random((7, 2))
    got = coef @ eval_basis(n_local, ref[:, 0], ref[:, 1])
    x = mesh.map_points(ref)
    want = f(x[..., 0], x[..., 1])
    assert np.max(np.abs(got - want)) <= 1e-12 * np.max(np.abs(want))


@pytest.mark.criterion(5)
@pytest.mark.parametrize("distortion", [0.0, 0.1, 0.25])
def test_global_area(distortion):
    mesh = build_structured_mesh(40, 40, EXTENT, EXTENT, distortion)
    rule = gauss_rule(2)
    area = math.fsum((mesh.jacobian_dets(rule.points) * rule.weights).ravel().tolist())
    assert abs(area - EXTENT**2) <= 1e-10 * EXTENT**2


# 6 -------------------------------------------------------------------------

SCALE_SIZES = (16384, 65536, 262144)


@pytest.fixture(scope="module")
def scale_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("scale") / "scale.csv"
    cmd = [sys.executable, "-m", "seaice_stress", "bench", "scale",
           "--elements", ",".join(map(str, SCALE_SIZES)),
           "--iterations", "3000", "--threads", "4,1", "--out", str(out)]
    t0 = time.perf_counter()
    proc = subprocess.run(cmd, capture_output=True, text=True)
    elapsed = time.perf_counter() - t0
    assert proc.returncode == 0, proc.stderr
    rows = read_csv(out)
    for r in rows:
        print(f"N={r['n_elements']} {r['exec']}/{r['workers']}: "
              f"{float(r['elements_per_second']):.3e} elements/s")
    print(f"bench scale wall time {elapsed:.1f} s")
    return elapsed, rows


def _throughput(rows, n, exec_kind):
    (row,) = [r for r in rows if int(r["n_elements"]) == n and r["exec"] == exec_kind]
    return float(row["elements_per_second"])


@pytest.mark.slow
@pytest.mark.criterion(6)
def test_scale_runtime_and_shape(scale_run):
    elapsed, rows = scale_run
    assert elapsed < 600.0
    assert sorted({int(r["n_elements"]) for r in rows}) == list(SCALE_SIZES)
    assert all(int(r["iterations"]) == 3000 for r in rows)
    assert len(rows) == 2 * len(SCALE_SIZES)


@pytest.mark.slow
@pytest.mark.criterion(6)
@pytest.mark.parametrize("exec_kind", ["serial", "parallel"])
def test_scale_linear(scale_run, exec_kind):
    _, rows = scale_run
    a, b = (_throughput(rows, n, exec_kind) for n in SCALE_SIZES[-2:])
    assert abs(a - b) / max(a, b) <= 0.35


@pytest.mark.slow
@pytest.mark.criterion(6)
def test_scale_parallel_speedup(scale_run):
    _, rows = scale_run
    n = SCALE_SIZES[-1]
    speedup = _throughput(rows, n, "parallel") / _throughput(rows, n, "serial")
    print(f"4-worker speedup at N={n}: {speedup:.2f}x")
    assert speedup >= 2.0


# 7 -------------------------------------------------------------------------

@pytest.fixture(scope="module")
def uniform_case():
    mesh = build_structured_mesh(64, 64, EXTENT, EXTENT, 0.2)
    return mesh, synth_fields(mesh, 3, 8, Scenario.UNIFORM), precompute_inverse_maps(mesh, 8)


def _f32_deviation(a, b):
    x, y = a.stress_arrays(), b.stress_arrays()
    return np.abs(x - y).max() / np.abs(x).max()


@pytest.mark.criterion(7)
def test_f32_single_update(uniform_case):
    mesh, state, maps = uniform_case
    s64, s32 = state.copy(), state.astype(Precision.F32)
    stress_update(s64, VPParams(), maps=maps)
    stress_update(s32, VPParams(), maps=maps)
    assert _f32_deviation(s64, s32) <= 1e-5


@pytest.mark.criterion(7)
def test_f32_after_relaxation(uniform_case):
    mesh, state, maps = uniform_case
    s64, s32 = state.copy(), state.astype(Precision.F32)
    mevp_relax(s64, VPParams(), 100, maps=maps)
    mevp_relax(s32, VPParams(), 100, maps=maps)
    assert _f32_deviation(s64, s32) <= 1e-3


# 8 -------------------------------------------------------------------------

@pytest.mark.criterion(8)
@pytest.mark.parametrize("n_a, n_s", PAIRS)
def test_tensorized_at_scale(n_a, n_s):
    params = VPParams()
    rng = np.random.default_rng(8)
    mesh = grid_mesh(16384)
    state = random_state(16384, n_a, n_s, rng, stress_scale=params.Pstar / params.alpha)
    maps = precompute_inverse_maps(mesh, n_s)
    reference = stress_update_reference(state, mesh, params)
    results = {}
    for strategy in TensorStrategy:
        s = state.copy()
        tensorized_stress_update(s, maps, params, strategy)
        assert relative_max_deviation(s.stresses, reference) <= 1e-12
        results[strategy] = s.stresses
    bmm, red = results.values()
    assert relative_max_deviation(bmm, red) <= 1e-12


# 9 -------------------------------------------------------------------------

@pytest.mark.criterion(9)
def test_table_budget():
    assert table_bytes() <= 65536
