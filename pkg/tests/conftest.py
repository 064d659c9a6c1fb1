import numpy as np
import pytest

NORTH = np.array([0.0, 1.0])
SOUTH = np.array([0.0, -1.0])
EAST = np.array([1.0, 0.0])
WEST = np.array([-1.0, 0.0])


@pytest.fixture
def rng():
    return np.random.default_rng(0)
