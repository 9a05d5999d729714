import numpy as np
import pytest

import gallery
from config import ORACLE_DIGITS
from core import DPR1Matrix
from oracle import oracle_eigvals


def as_matrix(raw) -> DPR1Matrix:
    return DPR1Matrix(raw.d, raw.z, raw.rho)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def ex1():
    return as_matrix(gallery.ex1())


@pytest.fixture
def ex2():
    return as_matrix(gallery.ex2())


@pytest.fixture
def ex3():
    return as_matrix(gallery.ex3())


@pytest.fixture
def small():
    """[[3, 1], [1, 2]] as D + rho z z^T."""
    return DPR1Matrix([2.0, 1.0], [1.0, 1.0], 1.0)


@pytest.fixture(scope="session")
def oracle_cache():
    """Memoized oracle eigenvalues keyed by the exact matrix bits."""
    cache = {}

    def get(a: DPR1Matrix, digits: int = ORACLE_DIGITS):
        key = (a.d.tobytes(), a.z.tobytes(), a.rho, digits)
        if key not in cache:
            cache[key] = oracle_eigvals(a, digits)
        return cache[key]

    return get
