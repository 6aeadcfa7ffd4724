import pytest
from hypothesis import settings

from logtr.curve import CurveSpec, analyze
from logtr.identities import example_curve

settings.register_profile("logtr", deadline=None, max_examples=40)
settings.load_profile("logtr")


def airy_spec():
    return CurveSpec.build("z**2", "z")


def mixed_spec():
    return CurveSpec.build("z**2", "z", y_logs=[(3, 1)])


@pytest.fixture(scope="session")
def airy():
    return analyze(airy_spec())


@pytest.fixture(scope="session")
def mixed():
    return analyze(mixed_spec())


@pytest.fixture(scope="session")
def ex1():
    return analyze(example_curve("sw-half", [0, 1], [1, 1]))


@pytest.fixture(scope="session")
def ex1_generic():
    return analyze(example_curve("sw-half", [0, 1, 3], [2, 3, -1]))


@pytest.fixture(scope="session")
def ex2():
    return analyze(example_curve("strip", [2, 3], [1, 2]))
