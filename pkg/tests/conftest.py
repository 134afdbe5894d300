import numpy as np
import pytest
from hypothesis import settings

from orlicz_lab import young
from orlicz_lab.space import DyadicSpace, RandomVariable

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def brute_conjugate(phi, ys, x_max, n=400_001):
    """sup_x (x y - Phi(x)) over a dense uniform grid, independent of the library's search."""
    xs = np.linspace(0.0, x_max, n)
    fx = phi(xs)
    return np.array([np.max(xs * y - fx) for y in np.atleast_1d(ys)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_rv(rng, k, scale=1.0):
    space = DyadicSpace(k)
    return RandomVariable(space, scale * rng.normal(size=space.size))


DELTA2_FAMILIES = {
    "x2": lambda: young.power(2.0),
    "p1.5": lambda: young.power(1.5),
    "p3": lambda: young.power(3.0),
    "quadratic": young.quadratic,
    "xlogx": young.xlogx,
}
