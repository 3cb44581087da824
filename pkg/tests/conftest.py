import pytest

from aoisched import TransitionKernel, derive, load_config
from aoisched.mdp import cost_table

# Reduced state space used by most unit tests; the acceptance suite runs the
# full-size baseline scenario.
SMALL_CONFIG = "delta_max = 6\nbattery_levels = 5\n"


@pytest.fixture(scope="session")
def default_params():
    return load_config("")


@pytest.fixture(scope="session")
def default_derived(default_params):
    return derive(default_params)


@pytest.fixture(scope="session")
def small_params():
    return load_config(SMALL_CONFIG)


@pytest.fixture(scope="session")
def default_kernel(default_params):
    return TransitionKernel(default_params)


@pytest.fixture(scope="session")
def small_kernel(small_params):
    return TransitionKernel(small_params)


@pytest.fixture(scope="session")
def small_costs(small_params, small_kernel):
    return cost_table(small_kernel.space, small_params)
