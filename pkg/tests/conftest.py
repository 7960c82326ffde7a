"""
Shared fixtures for the test suite.
"""

import os

import pytest

from quantum import ideal_pair_state
from simulation import EndUser, NetworkConfig, ideal_network_config


@pytest.fixture
def singlet():
    """Ideal source state with phase pi."""
    return ideal_pair_state()


@pytest.fixture
def ideal_config():
    """Lossless network with a perfect source and one pair per pulse."""
    return ideal_network_config()


@pytest.fixture
def default_config():
    """Network defaults calibrated to the measured source."""
    return NetworkConfig()


@pytest.fixture
def pair_a1b1():
    return EndUser.parse("A1"), EndUser.parse("B1")


@pytest.fixture(autouse=True)
def isolated_environment(monkeypatch):
    """Keep ENTNET_* variables of the host from leaking into tests."""
    for key in list(os.environ):
        if key.startswith("ENTNET_"):
            monkeypatch.delenv(key, raising=False)
