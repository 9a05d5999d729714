"""
High-precision reference eigensolver for dpr1eig.

Bisection on f(lambda) = 1 + rho * sum(zeta_j^2 / (d_j - lambda)) in mpmath,
one eigenvalue per pole interval, then x_j = zeta_j / (d_j - lambda).
Nothing is shared with the production solver: no shift, no inverse, no
double-double. Every call builds its own mpmath context so calls can run
concurrently with different precisions.
"""

from mpmath.ctx_mp import MPContext

import numpy as np

from config import ORACLE_DIGITS, logger
from core import DPR1Matrix, ValidationError
from ddarith import DoubleDouble

GUARD_DIGITS = 10


def _context(digits: int) -> MPContext:
    if digits < 32:
        raise ValidationError(f"oracle needs at least 32 digits, got {digits}")
    ctx = MPContext()
    ctx.dps = digits + GUARD_DIGITS
    return ctx


def _bisect(ctx, f, lo, hi, digits: int):
    """Zero of an increasing f on (lo, hi), to relative width 10^-digits."""
    tol = ctx.mpf(10) ** (-digits)
    # enough halvings to go from the bracket down to adjacent numbers at this precision
    max_iters = 4 * ctx.prec + 64
    for _ in range(max_iters):
        mid = (lo + hi) / 2
        if mid == lo or mid == hi:
            break
        if hi - lo <= tol * abs(mid):
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if fm < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def oracle_eigvals(a: DPR1Matrix, digits: int = ORACLE_DIGITS) -> list:
    """All eigenvalues, decreasing, as mpf numbers accurate to `digits` digits."""
    ctx = _context(digits)
    d = [ctx.mpf(float(x)) for x in a.d]
    z2 = [ctx.mpf(float(x)) ** 2 for x in a.z]
    rho = ctx.mpf(a.rho)

    def f(lam):
        return 1 + rho * ctx.fsum(zj / (dj - lam) for dj, zj in zip(d, z2))

    out = []
    for k in range(a.n):
        if k == 0:
            lo, hi = d[0], d[0] + rho * ctx.fsum(z2)
        else:
            lo, hi = d[k], d[k - 1]
        out.append(_bisect(ctx, f, lo, hi, digits))
    logger.debug(f"oracle: {a.n} eigenvalues at {digits} digits")
    return out


def oracle_eigvec(a: DPR1Matrix, lambda_hp, digits: int = ORACLE_DIGITS) -> list:
    """Unit eigenvector for the oracle eigenvalue lambda_hp, as a list of mpf."""
    ctx = _context(digits)
    lam = ctx.mpf(lambda_hp)
    x = [ctx.mpf(float(zj)) / (ctx.mpf(float(dj)) - lam) for dj, zj in zip(a.d, a.z)]
    norm = ctx.sqrt(ctx.fsum(xj * xj for xj in x))
    return [xj / norm for xj in x]


def dd_to_mpf(x: DoubleDouble, digits: int = ORACLE_DIGITS):
    ctx = _context(digits)
    return ctx.mpf(float(x.hi)) + ctx.mpf(float(x.lo))


def relative_error(computed, reference, digits: int = ORACLE_DIGITS) -> float:
    """|computed - reference| / |reference| evaluated in high precision.

    computed may be a float, an mpf or a DoubleDouble.
    """
    ctx = _context(digits)
    ref = ctx.mpf(reference)
    if isinstance(computed, DoubleDouble):
        val = ctx.mpf(dd_to_mpf(computed, digits))
    else:
        val = ctx.mpf(computed)
    if ref == 0:
        return float(abs(val))
    return float(abs(val - ref) / abs(ref))


def componentwise_error(v, v_ref, digits: int = ORACLE_DIGITS) -> float:
    """max_j |v_j - v*_j| / |v*_j| after aligning the sign of v to v_ref.

    Zero reference components are skipped; v_ref may hold floats or mpf.
    """
    ctx = _context(digits)
    v = np.asarray(v, dtype=float)
    ref = [ctx.mpf(r) for r in v_ref]
    if len(ref) != len(v):
        raise ValidationError(f"length mismatch: {len(v)} vs {len(ref)}")
    j = max(range(len(ref)), key=lambda t: abs(ref[t]))
    sign = 1 if (v[j] >= 0) == (ref[j] >= 0) else -1
    worst = ctx.mpf(0)
    for vj, rj in zip(v, ref):
        if rj == 0:
            continue
        err = abs(sign * ctx.mpf(float(vj)) - rj) / abs(rj)
        if err > worst:
            worst = err
    return float(worst)


def to_float_array(values) -> np.ndarray:
    """Round mpf values to binary64."""
    return np.array([float(x) for x in values])


def format_digits(value, digits: int) -> str:
    """Decimal string with `digits` significant digits."""
    ctx = _context(max(digits, 32))
    return ctx.nstr(ctx.mpf(value), digits, strip_zeros=False)
