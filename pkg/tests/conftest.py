import numpy as np
import pytest

from pathquant import geometry as G
from pathquant import paths as P


@pytest.fixture
def r2():
    return G.make_model("r2")


@pytest.fixture
def s2():
    return G.make_model("s2", radius=1.0)


@pytest.fixture
def t2_unit_level():
    return G.make_model("t2", scale=1.0 / (2.0 * np.pi))


@pytest.fixture
def coord_x():
    return G.coordinate_observable(0, "x")


@pytest.fixture
def coord_y():
    return G.coordinate_observable(1, "y")


@pytest.fixture
def grid64():
    return P.PathGrid(64)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
