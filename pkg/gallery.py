"""
Test-matrix gallery for dpr1eig.

The four worked examples with their known difficulties, plus a seeded
random generator with well separated poles and a wide dynamic range in z.
All values are produced directly as binary64 so a generated MatrixFile is
the exact matrix every test solves.
"""

import numpy as np

from config import EPS_M, EXAMPLE4_N, RANDOM_MIN_REL_GAP, RANDOM_Z_RANGE
from core import RawDPR1, ValidationError


def ex1() -> RawDPR1:
    """Huge exterior eigenvalue next to a tiny one; K_b ~ 1 everywhere."""
    d = [1e10, 5.0, 4e-3, 0.0, -4e-3, -5.0]
    z = [1e10, 1.0, 1.0, 1e-7, 1.0, 1.0]
    return RawDPR1(d, z, 1.0)


def ex2() -> RawDPR1:
    """Four poles a few ulps apart just above 1."""
    d = [1 + 40 * EPS_M, 1 + 30 * EPS_M, 1 + 20 * EPS_M, 1 + 10 * EPS_M]
    z = [1.0, 2.0, 2.0, 1.0]
    return RawDPR1(d, z, 1.0)


def ex3(beta: float = 1e-7) -> RawDPR1:
    """Small z next to a close pole pair: b needs double-double for k = 2, 3, 4."""
    d = [10 / 3, 2 + beta, 2 - beta, 1.0]
    z = [2.0, beta, beta, 2.0]
    return RawDPR1(d, z, 1.0)


def ex4(beta: float, n: int = EXAMPLE4_N) -> RawDPR1:
    """D = diag(1, 2+beta, 2-beta, ..., 2+m*beta, 2-m*beta, 10/3), z = [2, beta, ..., beta, 2].

    Returned in this (unsorted) order; reduce() orders it.
    """
    if n < 2 or n % 2:
        raise ValidationError(f"ex4 needs an even n >= 2, got {n}")
    if not beta > 0:
        raise ValidationError(f"ex4 needs beta > 0, got {beta}")
    m = (n - 2) // 2
    k = np.arange(1, m + 1)
    inner = np.empty(2 * m)
    inner[0::2] = 2 + k * beta
    inner[1::2] = 2 - k * beta
    d = np.concatenate([[1.0], inner, [10 / 3]])
    z = np.concatenate([[2.0], np.full(2 * m, beta), [2.0]])
    return RawDPR1(d, z, 1.0)


def random_dpr1(n: int, seed: int = 0, rho: float = 1.0,
                min_rel_gap: float = RANDOM_MIN_REL_GAP,
                z_range: tuple = RANDOM_Z_RANGE) -> RawDPR1:
    """Ordered irreducible random matrix.

    Poles are geometric sequences on each side of zero, every ratio at most
    1 - min_rel_gap, so neighbouring poles differ by at least min_rel_gap
    relative to the larger magnitude. z is log-uniform in z_range with
    random signs.
    """
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if not 0 < min_rel_gap < 1:
        raise ValidationError(f"min_rel_gap must lie in (0, 1), got {min_rel_gap}")
    rng = np.random.default_rng(seed)

    def _side(count):
        if count == 0:
            return np.empty(0)
        top = 10.0 ** rng.uniform(0.0, 3.0)
        lo_exp = np.log10(1.0 / (1.0 - min_rel_gap)) * 1.01
        ratios = 10.0 ** -rng.uniform(lo_exp, 0.5, size=count - 1)
        return top * np.concatenate([[1.0], np.cumprod(ratios)])

    npos = int(rng.integers(0, n + 1))
    pos = _side(npos)                   # decreasing, positive
    neg = -_side(n - npos)[::-1]        # decreasing, negative
    d = np.concatenate([pos, neg])

    lo, hi = np.log10(z_range[0]), np.log10(z_range[1])
    z = 10.0 ** rng.uniform(lo, hi, size=n) * rng.choice([-1.0, 1.0], size=n)
    return RawDPR1(d, z, rho)


GENERATORS = {
    "ex1": ex1,
    "ex2": ex2,
    "ex3": ex3,
    "ex4": ex4,
    "random": random_dpr1,
}


def generate(name: str, **params) -> RawDPR1:
    if name not in GENERATORS:
        raise ValidationError(f"unknown example {name!r}, choose from {', '.join(GENERATORS)}")
    try:
        return GENERATORS[name](**params)
    except TypeError as e:
        raise ValidationError(f"bad parameters for {name}: {e}") from e
