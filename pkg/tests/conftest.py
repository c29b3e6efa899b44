import numpy as np
import pytest

from leofim.scenario import default_scenario


@pytest.fixture(scope="session")
def default():
    return default_scenario()


@pytest.fixture
def rng():
    return np.random.default_rng(20241014)


_ACCEPTANCE_LINES = []


@pytest.fixture
def report_line():
    """Record one acceptance-criterion line for the terminal summary."""

    def record(line: str):
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
