import numpy as np
import pytest

from coupled_tops.spin import SpinJ

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line per acceptance criterion."""

    def _report(criterion: str, ok: bool, detail: str = ""):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}")
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20041)


def random_state(rng, twice_j, complex_=False):
    d = twice_j + 1
    v = rng.normal(size=d * d)
    if complex_:
        v = v + 1j * rng.normal(size=d * d)
    return v / np.linalg.norm(v)


@pytest.fixture(params=[1, 2, 3, 4, 7])
def spin(request):
    return SpinJ(request.param)
