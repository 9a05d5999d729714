"""
Core domain types for dpr1eig.

Holds the DPR1 and arrowhead matrix representations, the eigenpair and
diagnostics records, the exception hierarchy, and the preprocessing that
turns an arbitrary (d, z, rho) into the ordered irreducible form the solver
works on:

    A = D + rho * z z^T,   rho > 0,   d_1 > d_2 > ... > d_n,   zeta_i != 0

Everything here is immutable; arrays are copied and made read-only on
construction so the records can be shared between threads.
"""

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from config import (
    DEFLATION_TOL, TIE_TOL,
    EXIT_PARSE_ERROR, EXIT_SOLVER_ERROR, EXIT_EXTENDED_PRECISION,
    logger,
)

if TYPE_CHECKING:
    from ddarith import DoubleDouble


# === ERRORS ===

class DPR1Error(Exception):
    """Base class; exit_code is what the CLI returns for it."""
    exit_code = EXIT_SOLVER_ERROR


class ValidationError(DPR1Error, ValueError):
    exit_code = EXIT_PARSE_ERROR


class MatrixFileError(ValidationError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PoleError(DPR1Error, ValueError):
    pass


class SingularityError(DPR1Error, ZeroDivisionError):
    pass


class ReductionError(DPR1Error):
    pass


class ExtendedPrecisionRequired(DPR1Error):
    """K_b is too large for b to be recovered in double-double."""
    exit_code = EXIT_EXTENDED_PRECISION

    def __init__(self, K_b: float, k: int | None = None):
        self.K_b = K_b
        self.k = k
        where = f" (eigenpair {k})" if k is not None else ""
        super().__init__(f"K_b = {K_b:.3e} needs more than double the working precision{where}")


class SolverError(DPR1Error):
    """One or more eigenpairs failed; failures holds (k, exception) pairs."""

    def __init__(self, failures: list):
        self.failures = failures
        parts = [f"k={k}: {exc}" for k, exc in failures]
        super().__init__("eigenpair failures: " + "; ".join(parts))
        if failures and all(isinstance(exc, ExtendedPrecisionRequired) for _, exc in failures):
            self.exit_code = EXIT_EXTENDED_PRECISION


def _frozen(x) -> np.ndarray:
    arr = np.array(x, dtype=float)
    arr.setflags(write=False)
    return arr


# === MATRIX TYPES ===

@dataclass(frozen=True)
class RawDPR1:
    """A checked but otherwise arbitrary (d, z, rho) triple."""
    d: np.ndarray
    z: np.ndarray
    rho: float

    def __post_init__(self):
        object.__setattr__(self, "d", _frozen(self.d))
        object.__setattr__(self, "z", _frozen(self.z))
        object.__setattr__(self, "rho", float(self.rho))

    @property
    def n(self) -> int:
        return len(self.d)


@dataclass(frozen=True)
class DPR1Matrix:
    """Ordered irreducible D + rho z z^T."""
    d: np.ndarray
    z: np.ndarray
    rho: float

    def __post_init__(self):
        d = _frozen(self.d)
        z = _frozen(self.z)
        rho = float(self.rho)
        if d.ndim != 1 or d.shape != z.shape or len(d) < 1:
            raise ValidationError(f"d and z must be vectors of equal length >= 1, got {d.shape} and {z.shape}")
        if not rho > 0:
            raise ValidationError(f"rho must be positive, got {rho}")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(z)) and np.isfinite(rho)):
            raise ValidationError("non-finite entry")
        if np.any(d[:-1] <= d[1:]):
            raise ValidationError("d must be strictly decreasing")
        if np.any(z == 0.0):
            raise ValidationError("all zeta_i must be nonzero")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "rho", rho)

    @property
    def n(self) -> int:
        return len(self.d)


@dataclass(frozen=True)
class ArrowheadMatrix:
    """Permuted arrowhead A_i^{-1}: diag(delta) bordered by w, tip b at arrow_index.

    delta and w are stacked as [D_1 part, D_2 part]; the D_1 part is positive,
    the D_2 part negative. b_dd keeps the double-double tip when it was
    recomputed in double the working precision.
    """
    delta: np.ndarray
    w: np.ndarray
    b: float
    arrow_index: int
    b_dd: "DoubleDouble | None" = None

    def __post_init__(self):
        object.__setattr__(self, "delta", _frozen(self.delta))
        object.__setattr__(self, "w", _frozen(self.w))
        object.__setattr__(self, "b", float(self.b))

    @property
    def n(self) -> int:
        return len(self.delta) + 1

    def dense(self) -> np.ndarray:
        """The matrix with the arrow placed at arrow_index (tests only)."""
        n = self.n
        i = self.arrow_index
        inner = np.delete(np.arange(n), i)
        m = np.zeros((n, n))
        m[inner, inner] = self.delta
        m[inner, i] = self.w
        m[i, inner] = self.w
        m[i, i] = self.b
        return m


@dataclass(frozen=True)
class GivensRotation:
    """Rotation in the (i, j) plane that moved zeta_j into zeta_i."""
    i: int
    j: int
    c: float
    s: float


@dataclass(frozen=True)
class DeflatedPair:
    value: float
    vector: np.ndarray      # in input coordinates
    source: str             # "zero_z" or "tie"

    def __post_init__(self):
        object.__setattr__(self, "vector", _frozen(self.vector))


@dataclass(frozen=True)
class ReductionResult:
    core: DPR1Matrix | None
    permutation: np.ndarray     # core position k came from input index permutation[k]
    negated: bool
    deflated: tuple = ()
    rotations: tuple = ()
    n: int = 0

    def __post_init__(self):
        perm = np.array(self.permutation, dtype=int)
        perm.setflags(write=False)
        object.__setattr__(self, "permutation", perm)


REMEDIES = ("none", "R1", "R2", "bisect_interval", "recompute_via_inverse")


@dataclass(frozen=True)
class SolveDiagnostics:
    kappa_nu: float = 0.0
    K_b: float = 0.0
    K_z: float = 0.0
    K_nu: float = 0.0
    used_double_b: bool = False
    used_remedy: str = "none"       # one of REMEDIES
    bisection_iters: int = 0
    nu: float = 0.0

    def __post_init__(self):
        if self.used_remedy not in REMEDIES:
            raise ValidationError(f"unknown remedy {self.used_remedy!r}")

    def as_dict(self) -> dict:
        return {
            "kappa_nu": self.kappa_nu,
            "K_b": self.K_b,
            "K_z": self.K_z,
            "K_nu": self.K_nu,
            "used_double_b": self.used_double_b,
            "used_remedy": self.used_remedy,
            "bisection_iters": self.bisection_iters,
            "nu": self.nu,
        }


@dataclass(frozen=True)
class EigenPair:
    lam: float
    v: np.ndarray
    sigma: float
    mu: float

    def __post_init__(self):
        object.__setattr__(self, "v", _frozen(self.v))

    def exact_sum(self) -> "DoubleDouble":
        """sigma + mu without rounding: the extended representation of lambda."""
        from ddarith import two_sum
        return two_sum(self.sigma, self.mu)


# === OPERATIONS ===

def validate(d, z, rho) -> RawDPR1:
    """Check shapes and finiteness; no ordering or irreducibility needed yet."""
    d = np.asarray(d, dtype=float)
    z = np.asarray(z, dtype=float)
    if d.ndim != 1 or z.ndim != 1:
        raise ValidationError("d and z must be one-dimensional")
    if len(d) != len(z):
        raise ValidationError(f"length mismatch: len(d)={len(d)}, len(z)={len(z)}")
    if len(d) < 1:
        raise ValidationError("empty matrix")
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(z)) and np.isfinite(rho)):
        raise ValidationError("non-finite entry")
    if rho == 0:
        raise ValidationError("rho must be nonzero")
    return RawDPR1(d, z, rho)


def reduce(d, z, rho, deflation_tol: float = DEFLATION_TOL, tie_tol: float = TIE_TOL) -> ReductionResult:
    """Bring (d, z, rho) to ordered irreducible form.

    Steps: sign transform for rho < 0, deflation of (numerically) zero z
    entries, Givens deflation of tied poles, decreasing sort. Everything
    needed to map core eigenvectors back is recorded.
    """
    raw = validate(d, z, rho)
    n = raw.n
    negated = raw.rho < 0
    d = -raw.d if negated else raw.d.copy()
    z = raw.z.copy()
    rho = abs(raw.rho)

    deflated = []
    rotations = []

    znorm = float(np.max(np.abs(z)))
    ztol = deflation_tol * znorm
    active = []
    for i in range(n):
        if abs(z[i]) <= ztol:
            e = np.zeros(n)
            e[i] = 1.0
            deflated.append(DeflatedPair(d[i], e, "zero_z"))
        else:
            active.append(i)

    # Stable sort so equal poles keep their input order and reduce(core) is the identity
    active = sorted(active, key=lambda i: -d[i])

    kept = []
    for j in active:
        if kept:
            i = kept[-1]
            if abs(d[i] - d[j]) <= abs(d[i]) * tie_tol:
                r = float(np.hypot(z[i], z[j]))
                c = z[i] / r
                s = z[j] / r
                rotations.append(GivensRotation(i, j, c, s))
                z[i] = r
                z[j] = 0.0
                deflated.append(DeflatedPair(d[j], _rotated_unit(n, j, rotations), "tie"))
                continue
        kept.append(j)

    if not kept and not deflated:
        raise ReductionError("empty core with no deflations")

    core = DPR1Matrix(d[kept], z[kept], rho) if kept else None
    if negated:
        deflated = [DeflatedPair(-p.value, p.vector, p.source) for p in deflated]

    logger.info(
        f"reduce: n={n}, core={len(kept)}, deflated={len(deflated)}, "
        f"rotations={len(rotations)}, negated={negated}"
    )
    return ReductionResult(
        core=core,
        permutation=np.array(kept, dtype=int),
        negated=negated,
        deflated=tuple(deflated),
        rotations=tuple(rotations),
        n=n,
    )


def _apply_rotations_back(x: np.ndarray, rotations) -> np.ndarray:
    """Map a vector from rotated coordinates back to input coordinates."""
    for rot in reversed(rotations):
        xi, xj = x[rot.i], x[rot.j]
        x[rot.i] = rot.c * xi - rot.s * xj
        x[rot.j] = rot.s * xi + rot.c * xj
    return x


def _rotated_unit(n: int, j: int, rotations) -> np.ndarray:
    e = np.zeros(n)
    e[j] = 1.0
    return _apply_rotations_back(e, rotations)


def expand(reduction: ReductionResult, y: np.ndarray) -> np.ndarray:
    """Map core eigenvector(s) (columns of y) to input coordinates."""
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    if single:
        y = y[:, None]
    out = np.zeros((reduction.n, y.shape[1]))
    out[reduction.permutation, :] = y
    for col in range(out.shape[1]):
        _apply_rotations_back(out[:, col], reduction.rotations)
    return out[:, 0] if single else out


def materialize(a) -> np.ndarray:
    """Dense D + rho z z^T (tests and residual checks only)."""
    d = np.asarray(a.d, dtype=float)
    z = np.asarray(a.z, dtype=float)
    return np.diag(d) + a.rho * np.outer(z, z)


def is_interlaced(lam, d) -> bool:
    """lambda_1 > d_1 > lambda_2 > ... > lambda_n > d_n, strictly."""
    lam = np.asarray(lam, dtype=float)
    d = np.asarray(d, dtype=float)
    if len(lam) != len(d):
        return False
    if np.any(lam <= d):
        return False
    return bool(np.all(lam[1:] < d[:-1]))


def is_interlaced_exact(sigma, mu, d) -> bool:
    """Interlacing of the unrounded values sigma_k + mu_k.

    A tiny mu can round sigma + mu onto its pole; the pair itself still
    lies strictly inside the pole interval.
    """
    from ddarith import DoubleDouble, dd_add, two_sum
    sigma = np.asarray(sigma, dtype=float)
    mu = np.asarray(mu, dtype=float)
    d = np.asarray(d, dtype=float)
    if not len(sigma) == len(mu) == len(d):
        return False
    for k in range(len(d)):
        # sign of (sigma - d_k) + mu, exact up to the final rounding
        above = dd_add(two_sum(float(sigma[k]), -float(d[k])), DoubleDouble(float(mu[k])))
        if not above.hi > 0:
            return False
        if k > 0:
            below = dd_add(two_sum(float(sigma[k]), -float(d[k - 1])), DoubleDouble(float(mu[k])))
            if not below.hi < 0:
                return False
    return True
