import numpy as np
import pytest

from acc_falsify.idm import IdmParams
from acc_falsify.model import Setup
from acc_falsify.scenario import ScenarioRanges
from acc_falsify.sim import SimConfig


@pytest.fixture
def cfg():
    return SimConfig()


@pytest.fixture
def prm():
    return IdmParams()


@pytest.fixture
def ranges():
    return ScenarioRanges()


@pytest.fixture
def setup():
    return Setup()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
