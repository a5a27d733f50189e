import math

import pytest

from homoclinic.constants import certified_radius, lambda_star
from homoclinic.problem import catalog_instance


@pytest.fixture(scope="session")
def base_instance():
    return catalog_instance("quadratic")


@pytest.fixture(scope="session")
def radius_data(base_instance):
    """(C, C1, C2, delta1, r, Lambda*) for the quadratic catalog instance."""
    C, C1, C2, d1, r = certified_radius(base_instance)
    return C, C1, C2, d1, r, lambda_star(r, base_instance.gamma, C2, d1,
                                         base_instance.q)


@pytest.fixture(scope="session")
def half_star(base_instance, radius_data):
    """The quadratic instance at lambda = Lambda*/2."""
    return base_instance.with_lambda(radius_data[5] / 2)


def closed_G_signed_square(s):
    """Antiderivative of s|s| from 0: |s|^3/3."""
    return abs(s) ** 3 / 3.0


def gaussian_lstar(q, scale=1.0):
    s = 2.0 / (2.0 - q)
    return (scale * math.sqrt(math.pi / s)) ** (1.0 / s)


@pytest.fixture(scope="session")
def homoclinic_half(half_star):
    """Full homoclinic run at lambda = Lambda*/2 with default schedules."""
    from homoclinic.continuation import solve_homoclinic
    return solve_homoclinic(half_star)


# acceptance lines are collected here and printed in the terminal summary
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
