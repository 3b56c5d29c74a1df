import pytest
from hypothesis import settings

from edfix.spaces import DistanceFunction, FiniteMetricSpace

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def line3():
    return FiniteMetricSpace.on_line([0, 1, 3], ["p0", "p1", "p2"])


@pytest.fixture
def d_line3(line3):
    return DistanceFunction.of_metric(line3)
