import math

import pytest
from hypothesis import HealthCheck, settings

from artifact.thermo import ModelParams, solve_epsilon

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def standard_params():
    return ModelParams(10.0, 4.0, 2.0)


@pytest.fixture(scope="session")
def standard_state(standard_params):
    return solve_epsilon(standard_params)


@pytest.fixture(scope="session")
def ff_params():
    return ModelParams(math.inf, 1.0, 1.0, 0.1)


@pytest.fixture
def record_criterion():
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
