import numpy as np
import pytest

from phasetype import PhaseType

ACCEPTANCE_LINES = []


def record_criterion(number, passed, detail):
    """Log one acceptance line; ``passed=None`` marks a criterion that could not run."""
    status = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
    line = f"criterion {number}: {status} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def expo2():
    return PhaseType([1.0], [[-2.0]])


@pytest.fixture
def erlang2():
    """Erlang(2, rate 1) as a generalized Erlang representation."""
    return PhaseType([1.0, 0.0], [[-1.0, 1.0], [0.0, -1.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
