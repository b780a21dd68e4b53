import numpy as np
import pytest

from stap.fixtures import sioux_falls


@pytest.fixture(scope="session")
def sf():
    """Sioux Falls (network, demand, separable BPR model)."""
    return sioux_falls()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from acceptance_report import LINES

    if LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
