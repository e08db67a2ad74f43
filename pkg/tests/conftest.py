import pytest

from lanempc import MpcConfig, VehicleParams
from lanempc.scenario import (dynamic_three_vehicle, empty_road,
                              single_obstacle, static_three_vehicle)


@pytest.fixture(scope="session")
def params():
    return VehicleParams()


@pytest.fixture(scope="session")
def cfg():
    return MpcConfig()


@pytest.fixture(scope="session")
def static_scenario():
    return static_three_vehicle()


@pytest.fixture(scope="session")
def dynamic_scenario():
    return dynamic_three_vehicle()


@pytest.fixture(scope="session")
def empty_scenario():
    return empty_road()


@pytest.fixture(scope="session")
def small_scenario():
    return single_obstacle()
