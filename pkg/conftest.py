"""Shared fixtures for the fcaf test suite."""
import pytest

from fcaf.classification import example1_profile
from fcaf.config import Settings
from fcaf.measure import Measure


@pytest.fixture
def seed():
    """Root seed used across deterministic tests."""
    return 20240917


@pytest.fixture
def lebesgue():
    return Measure.lebesgue()


@pytest.fixture
def cubic_weight():
    """Density 3i^2 of the worked example."""
    return Measure.power_weight(2)


@pytest.fixture
def example_profile():
    return example1_profile()


@pytest.fixture
def fast_settings():
    """Settings with small probe counts so CLI runs stay quick."""
    return Settings(probes=8, grid_n=16, extract_grid_n=21, validation_n=10)
