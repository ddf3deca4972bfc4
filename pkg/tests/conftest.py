from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from pdmriccati import Grid, PhysicalSetup

settings.register_profile(
    "default", deadline=None, max_examples=60, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid() -> Grid:
    """The acceptance grid: [-4, 4] with 4001 points."""
    return Grid(-4.0, 4.0, 4001)


@pytest.fixture(scope="session")
def coarse() -> Grid:
    return Grid(-2.0, 2.0, 401)


@pytest.fixture(scope="session")
def setup() -> PhysicalSetup:
    return PhysicalSetup(E=1.0)
