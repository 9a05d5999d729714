"""
Forward stable eigensolver for ordered irreducible DPR1 matrices.

Each eigenpair is computed on its own (eigpair): shift to the pole nearest
the wanted eigenvalue, invert the shifted matrix into arrowhead form,
decide from the condition estimates whether the arrow tip b needs double
the working precision, find the extreme eigenvalue nu of the arrowhead by
bisection, and recover lambda = sigma + 1/nu and the eigenvector.
Non-extremal nu (K_nu large) is repaired by shifting to the other
neighbouring pole (R1) or by a non-standard shift close to lambda (R2);
an eigenvalue much closer to zero than to its poles is recomputed from
the inverse of A. A remedy result is only accepted inside the interlacing
interval of lambda_k; bisection on f inside that interval supplies the
fallback estimate.

Indices are 0-based throughout: k=0 is the exterior eigenvalue lambda_1 > d_1.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from config import (
    EPS_M, KAPPA_THRESHOLD_FACTOR, K_NU_THRESHOLD, ZERO_PROXIMITY_FACTOR,
    MAX_BISECT_ITERS, EXTENDED_PRECISION_FACTOR, DEFLATION_TOL, TIE_TOL,
    logger,
)
from core import (
    ArrowheadMatrix, DPR1Matrix, EigenPair, SolveDiagnostics, ReductionResult,
    DPR1Error, ExtendedPrecisionRequired, PoleError, SingularityError, SolverError,
    ValidationError, reduce, expand,
)
from ddarith import (
    DoubleDouble, two_sum, two_prod, dd_add, dd_sub, dd_mul, dd_div,
    dd_sum_of_quotients,
)
from secular import (
    LEFTMOST, RIGHTMOST, eval_F_midpoint, bisect_extreme, bisect_dpr1_extreme,
    bisect_interval, interlacing_interval,
)


@dataclass(frozen=True)
class SolverConfig:
    kappa_threshold_factor: float = KAPPA_THRESHOLD_FACTOR
    K_nu_threshold: float = K_NU_THRESHOLD
    zero_proximity_factor: float = ZERO_PROXIMITY_FACTOR
    max_bisect_iters: int = MAX_BISECT_ITERS
    use_double: bool = True
    extended_precision_factor: float = EXTENDED_PRECISION_FACTOR

    def __post_init__(self):
        for name in ("kappa_threshold_factor", "K_nu_threshold", "zero_proximity_factor",
                     "max_bisect_iters", "extended_precision_factor"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive, got {getattr(self, name)!r}")


@dataclass(frozen=True)
class DPR1Inverse:
    """diag(d_inv) + gamma * u u^T, or singular=True when the gamma denominator is zero."""
    d_inv: np.ndarray
    u: np.ndarray
    gamma: float
    singular: bool = False

    def dense(self) -> np.ndarray:
        return np.diag(self.d_inv) + self.gamma * np.outer(self.u, self.u)


@dataclass(frozen=True)
class Spectrum:
    """All eigenpairs, sorted by decreasing eigenvalue.

    Unpacks as (lam, V, diagnostics). diagnostics[k] is None for pairs that
    were deflated during reduction.
    """
    lam: np.ndarray
    V: np.ndarray
    sigma: np.ndarray
    mu: np.ndarray
    diagnostics: list
    reduction: ReductionResult | None = None

    def __iter__(self):
        return iter((self.lam, self.V, self.diagnostics))

    @property
    def n(self) -> int:
        return len(self.lam)

    def pair(self, k: int) -> EigenPair:
        return EigenPair(float(self.lam[k]), self.V[:, k], float(self.sigma[k]), float(self.mu[k]))


# === SHIFT AND INVERT ===

def shift_select(a: DPR1Matrix, k: int) -> int:
    """Index i of the pole d_i nearest lambda_k."""
    if not 0 <= k < a.n:
        raise IndexError(f"k={k} out of range for n={a.n}")
    if k == 0:
        return 0
    # F == 0: lambda_k is equidistant, take d_k
    return k if eval_F_midpoint(a, k) >= 0 else k - 1


def _kappa_b(n: int, K_b: float) -> float:
    return (n + 4) * math.sqrt(n) * K_b


def _kappa_z(n: int, K_z: float) -> float:
    return 3 * math.sqrt(n) + (n + 4) * (1 + 2 * K_z)


def _kappa_nu(n: int, K_b: float, K_z: float) -> float:
    return min(_kappa_b(n, K_b), _kappa_z(n, K_z))


def invert_shifted(a: DPR1Matrix, i: int, use_dd_b: bool = False) -> tuple:
    """(A - d_i I)^{-1} as an arrowhead, with K_b, K_z and kappa_nu.

    kappa_nu is always the working-precision estimate; K_b is refined with
    the double-double denominator when use_dd_b.
    """
    n = a.n
    d, z, rho = a.d, a.z, a.rho
    shift = d[i]
    others = np.delete(np.arange(n), i)
    D = d[others] - shift
    zo = z[others]
    wz = 1.0 / z[i]

    delta = 1.0 / D
    w = -zo * wz / D

    terms = zo * zo / D
    P = float(np.sum(terms[:i])) + 1.0 / rho
    Q = float(np.sum(terms[i:]))
    denom = abs(P + Q)
    K_b = (P - Q) / denom if denom != 0.0 else math.inf
    K_z = float(np.sum(np.abs(zo))) / abs(z[i])
    kappa_nu = _kappa_nu(n, K_b, K_z)

    b = (P + Q) * wz * wz
    b_dd = None
    if use_dd_b:
        den = two_sum(d[others], -shift)
        num = two_prod(zo, zo)
        inv_rho = dd_div(DoubleDouble(1.0), DoubleDouble(rho))
        S = dd_sum_of_quotients(num, den, start=inv_rho)
        b_dd = dd_div(S, two_prod(z[i], z[i]))
        b = float(b_dd)
        s = abs(float(S))
        K_b = (P - Q) / s if s != 0.0 else math.inf

    arrow = ArrowheadMatrix(delta, w, b, arrow_index=i, b_dd=b_dd)
    return arrow, K_b, K_z, kappa_nu


def vector_from_mu(a: DPR1Matrix, i: int, mu: float) -> tuple:
    """Unnormalized x and unit v for the eigenvalue d_i + mu."""
    if mu == 0.0:
        raise SingularityError("mu = 0: use the near-zero rescue instead")
    den = (a.d - a.d[i]) - mu
    den[i] = 1.0
    if np.any(den == 0.0):
        raise PoleError(f"d_i + mu hits a pole (i={i}, mu={mu!r})")
    x = a.z / den
    x[i] = -a.z[i] / mu
    return x, x / np.linalg.norm(x)


# === DPR1 INVERSES ===

def nonstandard_shift(a: DPR1Matrix, sigma, use_dd: bool = False) -> DPR1Inverse:
    """(A - sigma I)^{-1} in DPR1 form; sigma is a float or a DoubleDouble."""
    sig = sigma if isinstance(sigma, DoubleDouble) else DoubleDouble(float(sigma))
    d, z, rho = a.d, a.z, a.rho
    diff_dd = dd_sub(two_sum(d, -sig.hi), DoubleDouble(sig.lo))
    diff = diff_dd.hi + diff_dd.lo
    if np.any(diff == 0.0):
        raise PoleError(f"shift {float(sig.hi)!r} hits a pole")
    d_inv = 1.0 / diff
    u = z / diff

    if use_dd:
        S = dd_sum_of_quotients(two_prod(z, z), diff_dd)
        den = dd_add(DoubleDouble(1.0), dd_mul(DoubleDouble(rho), S))
        if den.hi == 0.0:
            return DPR1Inverse(d_inv, u, math.nan, singular=True)
        gamma = float(dd_div(DoubleDouble(-rho), den))
    else:
        den = 1.0 + rho * float(np.sum(z * z / diff))
        if den == 0.0:
            return DPR1Inverse(d_inv, u, math.nan, singular=True)
        gamma = -rho / den
    return DPR1Inverse(d_inv, u, gamma)


def invert_dpr1(a: DPR1Matrix, use_dd_gamma: bool = False) -> DPR1Inverse:
    """A^{-1} = D^{-1} + gamma D^{-1} z z^T D^{-1}; singular when 1 + rho z^T D^{-1} z is zero."""
    if np.any(a.d == 0.0):
        raise PoleError("invert_dpr1 needs all poles nonzero")
    return nonstandard_shift(a, 0.0, use_dd_gamma)


def _dominant(inv: DPR1Inverse, max_iters: int) -> tuple:
    """Eigenvalue of largest magnitude of a DPR1 inverse (ties go to the rightmost)."""
    right, it_r = bisect_dpr1_extreme(inv.d_inv, inv.u, inv.gamma, RIGHTMOST, max_iters)
    left, it_l = bisect_dpr1_extreme(inv.d_inv, inv.u, inv.gamma, LEFTMOST, max_iters)
    nu = right if abs(right) >= abs(left) else left
    K_nu = max(abs(right), abs(left)) / abs(nu)
    return nu, K_nu, it_r + it_l


# === ONE EIGENPAIR ===

@dataclass
class _Attempt:
    lam: float
    v: np.ndarray
    sigma: float
    mu: float
    nu: float
    K_b: float
    K_z: float
    kappa_nu: float
    K_nu: float
    used_dd: bool
    iters: int
    remedy: str = "none"


def _solve_at_pole(a: DPR1Matrix, k: int, i: int, cfg: SolverConfig) -> _Attempt:
    n = a.n
    arrow, K_b, K_z, kappa_nu = invert_shifted(a, i, use_dd_b=False)
    used_dd = False
    if cfg.use_double and kappa_nu > cfg.kappa_threshold_factor * n:
        arrow, K_b, K_z, _ = invert_shifted(a, i, use_dd_b=True)
        used_dd = True
        logger.debug(f"k={k}: kappa_nu={kappa_nu:.3e} > {cfg.kappa_threshold_factor}*n, b recomputed in double-double")
        limit = cfg.extended_precision_factor / EPS_M
        # a moderate K_z bound still vouches for nu whatever b is
        if K_b >= limit and _kappa_z(n, K_z) >= limit:
            raise ExtendedPrecisionRequired(K_b, k)

    side = LEFTMOST if i < k else RIGHTMOST
    other = RIGHTMOST if side == LEFTMOST else LEFTMOST
    nu, iters = bisect_extreme(arrow, side, cfg.max_bisect_iters)
    nu_other, _ = bisect_extreme(arrow, other, cfg.max_bisect_iters)
    K_nu = max(abs(nu), abs(nu_other)) / abs(nu)

    mu = 1.0 / nu
    _, v = vector_from_mu(a, i, mu)
    sigma = float(a.d[i])
    return _Attempt(sigma + mu, v, sigma, mu, nu, K_b, K_z, kappa_nu, K_nu, used_dd, iters)


def _r2_shift(lam_est: float, d_near: float) -> DoubleDouble:
    """Shift one eighth of the way from lam_est towards the nearer pole.

    Kept as a double-double only when no float lies strictly in between.
    """
    gap = two_sum(d_near, -lam_est)
    sigma = dd_add(DoubleDouble(lam_est), DoubleDouble(gap.hi * 0.125, gap.lo * 0.125))
    hi = float(sigma.hi)
    if min(lam_est, d_near) < hi < max(lam_est, d_near):
        return DoubleDouble(hi)
    return sigma


def _solve_nonstandard(a: DPR1Matrix, k: int, first: _Attempt, lam_est: float,
                       cfg: SolverConfig) -> _Attempt | None:
    neighbours = [float(a.d[k])] + ([float(a.d[k - 1])] if k > 0 else [])
    d_near = min(neighbours, key=lambda p: abs(p - lam_est))
    if lam_est == d_near:
        logger.warning(f"k={k}: eigenvalue estimate sits on pole {d_near!r}, R2 skipped")
        return None
    sigma = _r2_shift(lam_est, d_near)
    use_dd = cfg.use_double or sigma.lo != 0.0
    inv = nonstandard_shift(a, sigma, use_dd)
    if inv.singular:
        mu = 0.0
        nu, K_nu, iters = math.inf, 1.0, 0
    else:
        nu, K_nu, iters = _dominant(inv, cfg.max_bisect_iters)
        mu = 1.0 / nu
    lam_dd = dd_add(sigma, DoubleDouble(mu))
    den_dd = dd_sub(dd_sub(two_sum(a.d, -sigma.hi), DoubleDouble(sigma.lo)), DoubleDouble(mu))
    den = den_dd.hi + den_dd.lo
    if np.any(den == 0.0):
        return None
    x = a.z / den
    v = x / np.linalg.norm(x)
    logger.debug(f"k={k}: R2 with sigma={float(sigma)!r}, K_nu {first.K_nu:.3e} -> {K_nu:.3e}")
    # Store sigma's low part in mu so that sigma + mu stays the extended representation
    mu_stored = float(sigma.lo + mu)
    return _Attempt(float(lam_dd), v, float(sigma.hi), mu_stored, nu, first.K_b, first.K_z,
                    first.kappa_nu, K_nu, first.used_dd, first.iters + iters, "R2")


def _within(att: _Attempt, lo: float, hi: float) -> bool:
    """Whether sigma + mu, taken exactly, lies in (lo, hi)."""
    s = two_sum(att.sigma, att.mu)
    above = s.hi > lo or (s.hi == lo and s.lo > 0.0)
    below = s.hi < hi or (s.hi == hi and s.lo < 0.0)
    return bool(above and below)


def _from_estimate(a: DPR1Matrix, k: int, first: _Attempt, lam_est: float) -> _Attempt:
    i = k if k == 0 or abs(lam_est - a.d[k]) <= abs(lam_est - a.d[k - 1]) else k - 1
    sigma = float(a.d[i])
    mu = lam_est - sigma
    _, v = vector_from_mu(a, i, mu)
    return _Attempt(sigma + mu, v, sigma, mu, 1.0 / mu, first.K_b, first.K_z, first.kappa_nu,
                    first.K_nu, first.used_dd, first.iters, "bisect_interval")


def _apply_r2(a: DPR1Matrix, k: int, first: _Attempt, cfg: SolverConfig) -> _Attempt | None:
    """R2 from an estimate inside the interlacing interval; None keeps the first pass."""
    lo, hi = interlacing_interval(a, k)
    first_inside = _within(first, lo, hi)
    if first_inside:
        att = _solve_nonstandard(a, k, first, first.lam, cfg)
        if att is not None and _within(att, lo, hi):
            return att

    lam_est, _ = bisect_interval(a, k, cfg.max_bisect_iters)
    logger.debug(f"k={k}: first pass {first.lam!r} replaced by bisected estimate {lam_est!r}")
    att = _solve_nonstandard(a, k, first, lam_est, cfg)
    if att is not None and _within(att, lo, hi):
        return att
    if first_inside:
        return None
    logger.warning(f"k={k}: R2 left ({lo!r}, {hi!r}), keeping the bisected estimate")
    return _from_estimate(a, k, first, lam_est)


def _near_zero(a: DPR1Matrix, k: int, att: _Attempt, cfg: SolverConfig) -> bool:
    dist = abs(att.lam - a.d[k])
    if k > 0:
        dist = min(dist, abs(att.lam - a.d[k - 1]))
    return abs(att.lam) < cfg.zero_proximity_factor * dist


def _rescue_via_inverse(a: DPR1Matrix, k: int, att: _Attempt, cfg: SolverConfig) -> _Attempt:
    inv = invert_dpr1(a, use_dd_gamma=cfg.use_double)
    if inv.singular:
        lam = 0.0
        logger.debug(f"k={k}: A numerically singular, lambda set to 0")
    else:
        nu, _, _ = _dominant(inv, cfg.max_bisect_iters)
        lam = 1.0 / nu
        logger.debug(f"k={k}: lambda recomputed from A^-1: {att.lam!r} -> {lam!r}")
    return _Attempt(lam, att.v, 0.0, lam, att.nu, att.K_b, att.K_z, att.kappa_nu, att.K_nu,
                    att.used_dd, att.iters, "recompute_via_inverse")


def eigpair(a: DPR1Matrix, k: int, cfg: SolverConfig | None = None) -> tuple:
    """The k-th eigenpair (0-based, decreasing order) and its diagnostics."""
    cfg = cfg or SolverConfig()
    i = shift_select(a, k)
    att = _solve_at_pole(a, k, i, cfg)
    lo, hi = interlacing_interval(a, k)

    if att.K_nu > cfg.K_nu_threshold or not _within(att, lo, hi):
        repaired = None
        if k > 0:
            try:
                alt = _solve_at_pole(a, k, k - 1 if i == k else k, cfg)
            except ExtendedPrecisionRequired:
                alt = None
            if (alt is not None and alt.K_nu < att.K_nu and alt.K_nu <= cfg.K_nu_threshold
                    and _within(alt, lo, hi)):
                alt.remedy = "R1"
                repaired = alt
                logger.debug(f"k={k}: R1, K_nu {att.K_nu:.3e} -> {alt.K_nu:.3e}")
        if repaired is None:
            repaired = _apply_r2(a, k, att, cfg)
        if repaired is not None:
            att = repaired

    if _near_zero(a, k, att, cfg):
        att = _rescue_via_inverse(a, k, att, cfg)

    pair = EigenPair(att.lam, att.v, att.sigma, att.mu)
    diag = SolveDiagnostics(
        kappa_nu=att.kappa_nu, K_b=att.K_b, K_z=att.K_z, K_nu=att.K_nu,
        used_double_b=att.used_dd, used_remedy=att.remedy,
        bisection_iters=att.iters, nu=att.nu,
    )
    return pair, diag


# === FULL SPECTRUM ===

def eig_all(a: DPR1Matrix, cfg: SolverConfig | None = None, threads: int = 1) -> Spectrum:
    """Every eigenpair of an ordered irreducible matrix, each solved independently."""
    cfg = cfg or SolverConfig()
    n = a.n

    def _one(k):
        try:
            return eigpair(a, k, cfg)
        except DPR1Error as e:
            return e

    if threads > 1 and n > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_one, range(n)))
    else:
        results = [_one(k) for k in range(n)]

    failures = [(k, r) for k, r in enumerate(results) if isinstance(r, Exception)]
    if failures:
        for k, e in failures:
            logger.error(f"eigenpair {k} failed: {e}")
        raise SolverError(failures)

    pairs = [r[0] for r in results]
    diags = [r[1] for r in results]
    return Spectrum(
        lam=np.array([p.lam for p in pairs]),
        V=np.column_stack([p.v for p in pairs]),
        sigma=np.array([p.sigma for p in pairs]),
        mu=np.array([p.mu for p in pairs]),
        diagnostics=diags,
    )


def solve(d, z, rho, cfg: SolverConfig | None = None, threads: int = 1,
          deflation_tol: float = DEFLATION_TOL, tie_tol: float = TIE_TOL) -> Spectrum:
    """Eigen-decomposition of an arbitrary D + rho z z^T in input coordinates."""
    red = reduce(d, z, rho, deflation_tol, tie_tol)
    sign = -1.0 if red.negated else 1.0
    entries = []
    if red.core is not None:
        core = eig_all(red.core, cfg, threads)
        V = expand(red, core.V)
        for k in range(red.core.n):
            # + 0.0 turns the -0.0 of a negated zero into 0.0
            entries.append((sign * core.lam[k] + 0.0, V[:, k], sign * core.sigma[k] + 0.0,
                            sign * core.mu[k] + 0.0, core.diagnostics[k]))
    for p in red.deflated:
        entries.append((p.value + 0.0, np.array(p.vector), p.value + 0.0, 0.0, None))
    return _assemble(entries, red)


def _assemble(entries: list, red: ReductionResult | None) -> Spectrum:
    order = sorted(range(len(entries)), key=lambda j: -entries[j][0])
    entries = [entries[j] for j in order]
    return Spectrum(
        lam=np.array([e[0] for e in entries], dtype=float),
        V=np.column_stack([e[1] for e in entries]),
        sigma=np.array([e[2] for e in entries], dtype=float),
        mu=np.array([e[3] for e in entries], dtype=float),
        diagnostics=[e[4] for e in entries],
        reduction=red,
    )


def solve_pair(d, z, rho, k: int, cfg: SolverConfig | None = None,
               deflation_tol: float = DEFLATION_TOL, tie_tol: float = TIE_TOL) -> tuple:
    """The k-th pair (0-based, decreasing) of solve() without solving the whole spectrum.

    Core eigenvalues are ordered against deflated values through their
    interlacing intervals; a core pair is solved early only when a deflated
    value falls inside its interval.
    """
    red = reduce(d, z, rho, deflation_tol, tie_tol)
    if not 0 <= k < red.n:
        raise IndexError(f"k={k} out of range for n={red.n}")
    sign = -1.0 if red.negated else 1.0
    core = red.core
    deflated_core = [sign * p.value for p in red.deflated]   # deflated values in core coordinates

    solved = {}
    keys = []
    if core is not None:
        for kc in range(core.n):
            lo = core.d[kc]
            hi = core.d[kc - 1] if kc > 0 else math.inf
            if any(lo < v < hi for v in deflated_core):
                solved[kc] = eigpair(core, kc, cfg)
                keys.append(sign * solved[kc][0].lam)
            else:
                inside = 0.5 * (lo + hi) if kc > 0 else lo + 1.0 + abs(lo)
                keys.append(sign * inside)
    keys.extend(p.value for p in red.deflated)

    order = sorted(range(len(keys)), key=lambda j: -keys[j])
    j = order[k]
    ncore = core.n if core is not None else 0
    if j >= ncore:
        p = red.deflated[j - ncore]
        return EigenPair(p.value, p.vector, p.value, 0.0), None
    pair, diag = solved.get(j) or eigpair(core, j, cfg)
    v = expand(red, pair.v)
    return EigenPair(sign * pair.lam + 0.0, v, sign * pair.sigma + 0.0, sign * pair.mu + 0.0), diag
