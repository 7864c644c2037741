import numpy as np
import pytest

from ffep.problems import get_problem

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    """Record one PASS/FAIL line per acceptance criterion for the summary."""

    def report(label, ok, detail):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def euler_a():
    return get_problem("euler-a")


@pytest.fixture(scope="session")
def euler_b():
    return get_problem("euler-b")


@pytest.fixture(scope="session")
def harmonic():
    return get_problem("harmonic")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
