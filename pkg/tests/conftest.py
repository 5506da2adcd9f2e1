import random

import pytest
from hypothesis import HealthCheck, settings

from qvkirwan.linalg import Field
from qvkirwan.quiver import DimensionVector, Quiver, cb_quiver
from qvkirwan.representations import cb_setup

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

F101 = Field(101)
F2 = Field(2)
F3 = Field(3)


def jordan():
    return Quiver.build(["1"], [("loop", "1", "1")])


def a1():
    return Quiver.build(["1"], [])


def a2():
    return Quiver.build(["1", "2"], [("b", "1", "2")])


def setup(Q0, v, w):
    """``(cb quiver, doubled quiver, alpha)`` for dimension and framing dicts."""
    cbq = cb_quiver(Q0, DimensionVector(dict(w)))
    D, alpha = cb_setup(cbq, DimensionVector(dict(v)))
    return cbq, D, alpha


# (name, quiver, v, w) used by the sampled suites
CASES = [
    ("jordan-v1-w1", jordan, {"1": 1}, {"1": 1}),
    ("jordan-v2-w1", jordan, {"1": 2}, {"1": 1}),
    ("jordan-v1-w2", jordan, {"1": 1}, {"1": 2}),
    ("jordan-v2-w2", jordan, {"1": 2}, {"1": 2}),
    ("a2-v11-w10", a2, {"1": 1, "2": 1}, {"1": 1, "2": 0}),
]


@pytest.fixture
def rng():
    return random.Random(20261015)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
