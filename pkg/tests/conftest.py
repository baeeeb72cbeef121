import numpy as np
import pytest

from seaice_stress.kernels import VPParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240603)


@pytest.fixture
def params():
    return VPParams()


CRITERIA = {
    1: "oracle equivalence of every variant",
    2: "affine contraction of the relaxation",
    3: "determinism across workers and layouts",
    4: "D floor and tracer clamping",
    5: "quadrature and projection accuracy",
    6: "desk-scale benchmark reproduction",
    7: "single vs double precision",
    8: "tensorized strategies",
    9: "constant-table budget",
}
_outcomes: dict[int, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    report = (yield).get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or report.failed or report.skipped:
        outcome = "passed" if report.passed else "failed"
        _outcomes.setdefault(marker.args[0], []).append(f"{outcome}:{item.name}")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, title in CRITERIA.items():
        results = _outcomes.get(n)
        if results is None:
            tr.write_line(f"criterion {n}: NOT RUN  {title}")
            continue
        failed = [r.split(":", 1)[1] for r in results if r.startswith("failed")]
        status = "FAIL" if failed else "PASS"
        detail = f" (failed: {', '.join(failed)})" if failed else ""
        tr.write_line(f"criterion {n}: {status}  {title}{detail}")
