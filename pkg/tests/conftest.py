import numpy as np
import pytest

from slbohm import PhysicalParams, Potential


@pytest.fixture
def free():
    return Potential.free()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def within_se(value, target, se, k=3.0):
    return abs(value - target) <= k * se


@pytest.fixture
def brownian():
    return PhysicalParams(gamma=0.2, kT=0.5)


# acceptance verdicts, one line per criterion, printed after the run
ACCEPTANCE = {}


@pytest.fixture
def verdict(request):
    """Record a criterion's pass/fail line: verdict(number, ok, detail)."""

    def record(number, ok, detail):
        ACCEPTANCE[number] = (bool(ok), detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
