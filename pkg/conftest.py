"""
Shared fixtures for the dyncrowd test suite.

Long acceptance runs are marked ``slow`` and only run with ``--runslow``.
"""

import pytest

from dyncrowd.core.config import EngineConfig
from dyncrowd.core.logging import setup_logging
from dyncrowd.core.types import PedestrianState

setup_logging("WARNING")


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow acceptance tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long acceptance run, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def cfg():
    return EngineConfig()


def ped(pid, x, y, theta=None, frame=0):
    """Pedestrian with a heading; used across test modules."""
    return PedestrianState(id=pid, frame=frame, x=float(x), y=float(y), theta=theta,
                           has_history=theta is not None)


@pytest.fixture
def make_ped():
    return ped
