import numpy as np
import pytest

from config import Config
from geometry.complexes import build_complex, interval_complex, polygon_complex, simplex_complex
from geometry.posets import face_poset_op


@pytest.fixture
def unit_interval():
    return interval_complex(0.0, 1.0)


@pytest.fixture
def triangle():
    return simplex_complex(2)


@pytest.fixture
def circle3():
    return polygon_complex(3)


@pytest.fixture
def cycle_poset():
    return face_poset_op(build_complex([(0, 1), (1, 2), (0, 2)]))


@pytest.fixture
def rng():
    return np.random.default_rng(Config.RANDOM_SEED)
