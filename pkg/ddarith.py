"""
Double-double arithmetic for dpr1eig.

A DoubleDouble is the unevaluated sum hi + lo of two binary64 numbers with
hi = fl(hi + lo), which carries roughly 32 significant decimal digits.
Everything here is built from the classical error-free transformations
(two_sum, two_prod) and never relies on operator contraction: CPython
performs every float operation separately with a single rounding, and numpy
elementwise arithmetic does the same, so the formulas below are evaluated
exactly as written.

The transformations have no data-dependent branches, so they work on
Python floats and elementwise on numpy arrays alike. The solver uses the
array form to build all quotients of a sum at once and then accumulates
them left to right.
"""

import math
from dataclasses import dataclass

import numpy as np

from core import SingularityError

# Dekker's splitting constant 2**27 + 1 for binary64
_SPLITTER = 134217729.0

# math.fma appeared in Python 3.13
_fma = getattr(math, "fma", None)


@dataclass(frozen=True, slots=True)
class DoubleDouble:
    hi: float
    lo: float = 0.0

    def __float__(self) -> float:
        return float(self.hi + self.lo)

    def __neg__(self) -> "DoubleDouble":
        return DoubleDouble(-self.hi, -self.lo)

    def __add__(self, other):
        return dd_add(self, _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return dd_sub(self, _coerce(other))

    def __rsub__(self, other):
        return dd_sub(_coerce(other), self)

    def __mul__(self, other):
        return dd_mul(self, _coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return dd_div(self, _coerce(other))

    def __rtruediv__(self, other):
        return dd_div(_coerce(other), self)

    def __getitem__(self, idx) -> "DoubleDouble":
        """Pick one element of an array-valued DoubleDouble."""
        return DoubleDouble(float(self.hi[idx]), float(self.lo[idx]))

    def __len__(self) -> int:
        return len(self.hi)


def _coerce(x) -> DoubleDouble:
    if isinstance(x, DoubleDouble):
        return x
    return DoubleDouble(x, 0.0 * x)


def _has_zero(x) -> bool:
    return bool(np.any(np.asarray(x) == 0.0))


# === ERROR-FREE TRANSFORMATIONS ===

def quick_two_sum(a, b):
    """hi + lo = a + b exactly, assuming |a| >= |b| (or a == 0)."""
    s = a + b
    e = b - (s - a)
    return s, e


def _two_sum(a, b):
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def two_sum(a, b) -> DoubleDouble:
    """Knuth's branch-free TwoSum: hi = fl(a + b), hi + lo = a + b exactly."""
    s, e = _two_sum(a, b)
    return DoubleDouble(s, e)


def split(a):
    """Dekker's split of a into two 26-bit halves, a = hi + lo."""
    t = _SPLITTER * a
    hi = t - (t - a)
    lo = a - hi
    return hi, lo


def _two_prod(a, b):
    p = a * b
    if _fma is not None and not isinstance(p, np.ndarray):
        return p, _fma(a, b, -p)
    ah, al = split(a)
    bh, bl = split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def two_prod(a, b) -> DoubleDouble:
    """hi = fl(a*b), hi + lo = a*b exactly (barring overflow/underflow)."""
    p, e = _two_prod(a, b)
    return DoubleDouble(p, e)


# === DOUBLE-DOUBLE OPERATIONS ===

def dd_add(x: DoubleDouble, y: DoubleDouble) -> DoubleDouble:
    """Accurate double-double addition (both halves summed with TwoSum)."""
    s, e = _two_sum(x.hi, y.hi)
    t, f = _two_sum(x.lo, y.lo)
    e = e + t
    s, e = quick_two_sum(s, e)
    e = e + f
    s, e = quick_two_sum(s, e)
    return DoubleDouble(s, e)


def dd_sub(x: DoubleDouble, y: DoubleDouble) -> DoubleDouble:
    return dd_add(x, DoubleDouble(-y.hi, -y.lo))


def dd_mul(x: DoubleDouble, y: DoubleDouble) -> DoubleDouble:
    p, e = _two_prod(x.hi, y.hi)
    e = e + (x.hi * y.lo + x.lo * y.hi)
    p, e = quick_two_sum(p, e)
    return DoubleDouble(p, e)


def _dd_mul_float(x: DoubleDouble, b) -> DoubleDouble:
    p, e = _two_prod(x.hi, b)
    e = e + x.lo * b
    p, e = quick_two_sum(p, e)
    return DoubleDouble(p, e)


def dd_div(x: DoubleDouble, y: DoubleDouble) -> DoubleDouble:
    """Long division with three quotient digits; raises on y == 0."""
    if _has_zero(y.hi):
        raise SingularityError("double-double division by zero")
    q1 = x.hi / y.hi
    r = dd_sub(x, _dd_mul_float(y, q1))
    q2 = r.hi / y.hi
    r = dd_sub(r, _dd_mul_float(y, q2))
    q3 = r.hi / y.hi
    q1, q2 = quick_two_sum(q1, q2)
    return dd_add(DoubleDouble(q1, q2), DoubleDouble(q3, 0.0 * q3))


def dd_sum_of_quotients(num, den, start: DoubleDouble | None = None) -> DoubleDouble:
    """Sum num_k/den_k with every quotient and every addition in double-double.

    num and den are float arrays or array-valued DoubleDoubles. Quotients are
    formed elementwise, then accumulated strictly left to right, starting
    from `start` when given.
    """
    num = _coerce_array(num)
    den = _coerce_array(den)
    if num.hi.shape != den.hi.shape:
        raise ValueError(f"length mismatch: {num.hi.shape} vs {den.hi.shape}")
    if _has_zero(den.hi):
        raise SingularityError("zero denominator in sum of quotients")

    if start is None:
        s, e = 0.0, 0.0
    else:
        s, e = float(start.hi), float(start.lo)
    if num.hi.size == 0:
        return DoubleDouble(s, e)

    q = dd_div(num, den)
    # dd_add inlined on plain floats; this loop is the hot path of the b recompute
    for qh, ql in zip(q.hi.tolist(), q.lo.tolist()):
        a = s + qh
        bb = a - s
        b = (s - (a - bb)) + (qh - bb)
        t = e + ql
        tt = t - e
        f = (e - (t - tt)) + (ql - tt)
        b = b + t
        s = a + b
        b = b - (s - a)
        b = b + f
        a = s + b
        e = b - (a - s)
        s = a
    return DoubleDouble(s, e)


def _coerce_array(x) -> DoubleDouble:
    if isinstance(x, DoubleDouble):
        return DoubleDouble(np.asarray(x.hi, dtype=float), np.asarray(x.lo, dtype=float))
    hi = np.asarray(x, dtype=float)
    return DoubleDouble(hi, np.zeros_like(hi))
