from __future__ import annotations

import pytest

from bcibot.runner import ScenarioRuntime
from bcibot.scenario import load_default_scenario


@pytest.fixture(scope="session")
def scenario():
    return load_default_scenario()


@pytest.fixture(scope="session")
def domain(scenario):
    return scenario.domain


@pytest.fixture()
def world(scenario):
    return scenario.build_world()


@pytest.fixture()
def state(world):
    return world.snapshot()


@pytest.fixture(scope="session")
def runtime(scenario):
    # shared cache: menu policies and plans are expensive to rebuild per test
    return ScenarioRuntime(scenario)
