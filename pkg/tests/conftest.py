import numpy as np
import pytest

from lshstream import build_forest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def gaussian_forest():
    """Small forest over 2-d Gaussian data, whole-window trees."""
    points = np.random.default_rng(7).normal(0.0, 1.0, (96, 2))
    return build_forest(points, 12, seed=31, sampling=False)


def make_points(n, m, seed, loc=0.0, scale=1.0):
    return np.random.default_rng(seed).normal(loc, scale, (n, m))
