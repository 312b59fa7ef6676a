import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from manhattan_workbench import fixtures
from manhattan_workbench.moebius import Isometry

settings.register_profile("workbench", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("workbench")


def random_isometry(rng: np.random.Generator, scale: float = 2.0) -> Isometry:
    while True:
        a, b, c = rng.normal(0, scale, 3)
        if abs(a) > 0.1:
            return Isometry(a, b, c, (1 + b * c) / a)


def random_hyperbolic(rng: np.random.Generator) -> Isometry:
    while True:
        g = random_isometry(rng)
        if abs(g.trace) > 2.2:
            return g


def random_point(rng: np.random.Generator) -> complex:
    return complex(rng.normal(0, 2), math.exp(rng.normal(0, 1)))


def random_boundary(rng: np.random.Generator) -> float:
    return math.inf if rng.random() < 0.1 else float(rng.normal(0, 3))


@pytest.fixture(scope="session")
def F1():
    return fixtures.pair("F1")


@pytest.fixture(scope="session")
def F1F2():
    return fixtures.pair("F1F2")


@pytest.fixture(scope="session")
def F1F3():
    return fixtures.pair("F1F3")


@pytest.fixture(scope="session")
def F4():
    return fixtures.pair("F4")


# full-size curves shared by the manhattan tests and the acceptance suite


@pytest.fixture(scope="session")
def curve_F1F2(F1F2):
    from manhattan_workbench.manhattan import trace_curve
    return trace_curve(F1F2)


@pytest.fixture(scope="session")
def curve_F1F3(F1F3):
    from manhattan_workbench.manhattan import trace_curve
    return trace_curve(F1F3)


@pytest.fixture(scope="session")
def rigidity_F1F2(F1F2, curve_F1F2):
    from manhattan_workbench.manhattan import rigidity_report
    return rigidity_report(F1F2, points=curve_F1F2)


@pytest.fixture(scope="session")
def rigidity_F1F3(F1F3, curve_F1F3):
    from manhattan_workbench.manhattan import rigidity_report
    return rigidity_report(F1F3, points=curve_F1F3)
