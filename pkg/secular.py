"""
Secular functions and bisection for dpr1eig.

f(lambda) = 1 + rho * sum(zeta_j^2 / (d_j - lambda))     zeros = eigenvalues of D + rho z z^T
g(nu)     = b - nu - sum(w_j^2 / (delta_j - nu))          zeros = eigenvalues of the arrowhead

f is strictly increasing between its poles for rho > 0; g is strictly
decreasing between its poles. The arrowhead and the DPR1 inverse are only
solved for their extreme zeros, so those brackets lie outside the pole
range (or between the two outermost poles for the DPR1 inverse). f itself
is bisected inside one interlacing interval as a fallback estimate.
"""

import numpy as np

from config import EPS_M, MAX_BISECT_ITERS
from core import ArrowheadMatrix, DPR1Matrix, PoleError

LEFTMOST = "leftmost"
RIGHTMOST = "rightmost"


def eval_f(a: DPR1Matrix, lam: float) -> float:
    if np.any(a.d == lam):
        raise PoleError(f"lambda={lam!r} is a pole of f")
    return float(1.0 + a.rho * np.sum(a.z * a.z / (a.d - lam)))


def eval_g(m: ArrowheadMatrix, nu: float) -> float:
    if np.any(m.delta == nu):
        raise PoleError(f"nu={nu!r} is a pole of g")
    return float(m.b - nu - np.sum(m.w * m.w / (m.delta - nu)))


def eval_F_midpoint(a: DPR1Matrix, k: int) -> int:
    """Sign of f, shifted by d_k, at the midpoint between d_k and d_{k-1} (k >= 1, 0-based).

    Positive means lambda_k lies in the lower half, nearer d_k.
    """
    if not 1 <= k < a.n:
        raise IndexError(f"k={k} has no left neighbouring pole")
    dbar = a.d - a.d[k]
    tau = dbar[k - 1] / 2.0
    F = 1.0 + a.rho * np.sum(a.z * a.z / (dbar - tau))
    return int(np.sign(F))


def _converged(lo: float, hi: float) -> bool:
    if np.nextafter(lo, hi) >= hi:
        return True
    mid = 0.5 * (lo + hi)
    return hi - lo <= 2.0 * EPS_M * abs(mid)


def arrow_bracket(m: ArrowheadMatrix, side: str) -> tuple:
    """Gershgorin-style enclosure of the requested extreme eigenvalue."""
    wsum = float(np.sum(np.abs(m.w)))
    if side == RIGHTMOST:
        if len(m.delta):
            dmax = float(np.max(m.delta))
            edge = max(dmax, m.b)
            return edge, edge + wsum + abs(m.b - dmax)
        return m.b, m.b
    if side == LEFTMOST:
        if len(m.delta):
            dmin = float(np.min(m.delta))
            edge = min(dmin, m.b)
            return edge - wsum - abs(m.b - dmin), edge
        return m.b, m.b
    raise ValueError(f"unknown side {side!r}")


def bisect_extreme(m: ArrowheadMatrix, side: str, max_iters: int = MAX_BISECT_ITERS) -> tuple:
    """Leftmost or rightmost eigenvalue of an arrowhead matrix by bisection on g.

    Returns (nu, iterations).
    """
    lo, hi = arrow_bracket(m, side)
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ValueError(f"non-finite bracket [{lo}, {hi}]")
    if lo == hi:
        return lo, 0

    delta = np.asarray(m.delta)
    w2 = m.w * m.w
    b = m.b
    if side == RIGHTMOST:
        edge_pole = float(np.max(delta)) if len(delta) else None
    else:
        edge_pole = float(np.min(delta)) if len(delta) else None

    iters = 0
    while iters < max_iters and not _converged(lo, hi):
        mid = 0.5 * (lo + hi)
        if mid == edge_pole:
            mid = float(np.nextafter(mid, hi if side == RIGHTMOST else lo))
            if not lo < mid < hi:
                break
        iters += 1
        g = b - mid - np.sum(w2 / (delta - mid))
        if g > 0.0:
            lo = mid
        elif g < 0.0:
            hi = mid
        else:
            return mid, iters
    return 0.5 * (lo + hi), iters


def bisect_dpr1_extreme(d, u, gamma: float, side: str, max_iters: int = MAX_BISECT_ITERS) -> tuple:
    """Extreme eigenvalue of diag(d) + gamma u u^T by bisection on its secular function.

    d need not be ordered and gamma may have either sign. Returns (x, iterations).
    """
    d = np.asarray(d, dtype=float)
    u = np.asarray(u, dtype=float)
    u2 = u * u
    if len(d) == 1:
        return float(d[0] + gamma * u2[0]), 0

    order = np.sort(d)
    dmin, dmin2 = float(order[0]), float(order[1])
    dmax, dmax2 = float(order[-1]), float(order[-2])
    spread = abs(gamma) * float(np.sum(u2))

    if gamma > 0:
        lo, hi = (dmax, dmax + spread) if side == RIGHTMOST else (dmin, dmin2)
    else:
        lo, hi = (dmax2, dmax) if side == RIGHTMOST else (dmin - spread, dmin)
    if lo == hi:
        return lo, 0

    iters = 0
    while iters < max_iters and not _converged(lo, hi):
        mid = 0.5 * (lo + hi)
        if np.any(d == mid):
            break
        iters += 1
        h = 1.0 + gamma * np.sum(u2 / (d - mid))
        if h == 0.0:
            return mid, iters
        # h increases through each pole interval for gamma > 0, decreases for gamma < 0
        if (h < 0.0) == (gamma > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), iters


# === ONE POLE INTERVAL ===

def interlacing_interval(a: DPR1Matrix, k: int) -> tuple:
    """(lo, hi) enclosing lambda_k: (d_k, d_{k-1}), or (d_1, d_1 + rho ||z||^2] for k = 0.

    The exterior upper end is widened by a few ulps to absorb the rounding of the norm.
    """
    if not 0 <= k < a.n:
        raise IndexError(f"k={k} out of range for n={a.n}")
    lo = float(a.d[k])
    if k > 0:
        return lo, float(a.d[k - 1])
    span = a.rho * float(np.sum(a.z * a.z)) * (1.0 + 8 * (a.n + 2) * EPS_M)
    return lo, float(np.nextafter(lo + span, np.inf))


def bisect_interval(a: DPR1Matrix, k: int, max_iters: int = MAX_BISECT_ITERS) -> tuple:
    """lambda_k by bisection on f inside its interlacing interval.

    f runs from -inf at d_k upwards, so the zero is always bracketed.
    Returns (lambda, iterations).
    """
    lo, hi = interlacing_interval(a, k)
    d = np.asarray(a.d)
    z2 = a.z * a.z
    iters = 0
    while iters < max_iters and not _converged(lo, hi):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        iters += 1
        f = 1.0 + a.rho * np.sum(z2 / (d - mid))
        if f < 0.0:
            lo = mid
        elif f > 0.0:
            hi = mid
        else:
            return mid, iters
    lam = 0.5 * (lo + hi)
    # stay off the poles when lo and hi are neighbouring floats
    if lam == a.d[k]:
        lam = hi
    elif k > 0 and lam == a.d[k - 1]:
        lam = lo
    return lam, iters
