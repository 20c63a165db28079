import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from twostream.diagnostics import random_smooth_field
from twostream.fields import GridSpec, StreamPair
from twostream.nashmoser import newton_solve
from twostream.scenario import parse_scenario, shipped_scenarios

settings.register_profile(
    "default",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def small_grid():
    return GridSpec(1.0, 1.0, 1.0, 12, 8, 8)


@pytest.fixture(scope="session")
def base_pair(small_grid):
    return StreamPair.linear(small_grid, (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def perturbed_pair(grid, rng, amp=0.01):
    """Base pair ``(y, z)`` plus small smooth wall-vanishing corrections."""
    f = amp * random_smooth_field(grid, rng)
    g = amp * random_smooth_field(grid, rng)
    return StreamPair(grid, (0.0, 1.0, 0.0), (0.0, 0.0, 1.0), f, g)


@pytest.fixture(scope="session")
def beltrami_scenario():
    return parse_scenario(shipped_scenarios()["beltrami"])


@pytest.fixture(scope="session")
def beltrami_solution(beltrami_scenario):
    sc = beltrami_scenario
    pair, report = newton_solve(sc.problem, tol=sc.tol, params=sc.params)
    assert report.converged
    return pair, report


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
