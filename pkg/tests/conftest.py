import pytest
from hypothesis import settings

from levelcross.billiards import CylinderBilliard, RectBilliard
from levelcross.crossings import CrossingWindow, enumerate_crossings

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@pytest.fixture(scope="session")
def rect():
    return RectBilliard()


@pytest.fixture(scope="session")
def cyl():
    return CylinderBilliard()


@pytest.fixture(scope="session")
def rect_3000(rect):
    return enumerate_crossings(CrossingWindow(rect, 3000.0, 1.0, 2.0))


@pytest.fixture(scope="session")
def rect_1000(rect):
    return enumerate_crossings(CrossingWindow(rect, 1000.0, 1.0, 2.0))


@pytest.fixture(scope="session")
def cyl_1400(cyl):
    return enumerate_crossings(CrossingWindow(cyl, 1400.0, 0.0, 1.0))
