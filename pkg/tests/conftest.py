import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from affineframe.catalog import layered_framework, square_framework, square_with_outer_vertex

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def square():
    return square_framework()


@pytest.fixture
def square_plus():
    return square_with_outer_vertex()


@pytest.fixture
def layered():
    return layered_framework()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
