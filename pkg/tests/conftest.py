import numpy as np
import pytest

from orbit.synth import make_desk_lake


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def desk_lake():
    return make_desk_lake(seed=0)


def by_rank(ordering, values):
    """Grid whose pixel of rank r holds ``values[r]``."""
    ordering = np.asarray(ordering)
    return np.asarray(values, dtype=np.uint8)[ordering]


def random_ordering(rng, rows, cols):
    return rng.permutation(rows * cols).reshape(rows, cols)
