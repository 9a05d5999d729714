import numpy as np
import pytest

from config import EPS_M
from core import (
    ArrowheadMatrix, DPR1Matrix, EigenPair, ExtendedPrecisionRequired, MatrixFileError,
    ReductionError, SolveDiagnostics, SolverError, ValidationError,
    expand, is_interlaced, is_interlaced_exact, materialize, reduce, validate,
)
from config import EXIT_EXTENDED_PRECISION, EXIT_PARSE_ERROR, EXIT_SOLVER_ERROR


# === TYPES ===

def test_dpr1_matrix_accepts_ordered_irreducible():
    a = DPR1Matrix([3.0, 2.0, 1.0], [1.0, -1.0, 2.0], 0.5)
    assert a.n == 3
    assert not a.d.flags.writeable
    assert not a.z.flags.writeable


@pytest.mark.parametrize("d, z, rho", [
    ([1.0, 2.0], [1.0, 1.0], 1.0),          # increasing
    ([2.0, 2.0], [1.0, 1.0], 1.0),          # tie
    ([2.0, 1.0], [1.0, 0.0], 1.0),          # zero zeta
    ([2.0, 1.0], [1.0, 1.0], -1.0),         # rho < 0
    ([2.0, 1.0], [1.0, 1.0], 0.0),
    ([2.0, 1.0], [1.0], 1.0),               # shape
    ([], [], 1.0),
    ([np.inf, 1.0], [1.0, 1.0], 1.0),
])
def test_dpr1_matrix_rejects(d, z, rho):
    with pytest.raises(ValidationError):
        DPR1Matrix(d, z, rho)


def test_arrowhead_dense_places_arrow():
    m = ArrowheadMatrix([1.0, -2.0], [3.0, 4.0], 5.0, arrow_index=1)
    assert m.n == 3
    np.testing.assert_array_equal(m.dense(), [[1, 3, 0], [3, 5, 4], [0, 4, -2]])


def test_eigenpair_exact_sum():
    p = EigenPair(1.0, np.array([1.0]), 1.0, 2.0 ** -60)
    s = p.exact_sum()
    assert (s.hi, s.lo) == (1.0, 2.0 ** -60)
    assert not p.v.flags.writeable


def test_diagnostics_as_dict_has_every_field():
    dg = SolveDiagnostics(kappa_nu=1.0, K_b=2.0, K_z=3.0, K_nu=4.0, used_double_b=True,
                          used_remedy="R1", bisection_iters=7, nu=0.5)
    assert dg.as_dict() == {
        "kappa_nu": 1.0, "K_b": 2.0, "K_z": 3.0, "K_nu": 4.0, "used_double_b": True,
        "used_remedy": "R1", "bisection_iters": 7, "nu": 0.5,
    }


def test_diagnostics_reject_unknown_remedy():
    assert SolveDiagnostics(used_remedy="bisect_interval").used_remedy == "bisect_interval"
    with pytest.raises(ValidationError):
        SolveDiagnostics(used_remedy="R3")


def test_exit_codes():
    assert ValidationError("x").exit_code == EXIT_PARSE_ERROR
    assert MatrixFileError("x", 3).exit_code == EXIT_PARSE_ERROR
    assert str(MatrixFileError("bad", 3)) == "line 3: bad"
    assert ExtendedPrecisionRequired(1e30, 2).exit_code == EXIT_EXTENDED_PRECISION
    assert SolverError([(1, ExtendedPrecisionRequired(1e30, 1))]).exit_code == EXIT_EXTENDED_PRECISION
    mixed = SolverError([(0, ExtendedPrecisionRequired(1e30, 0)), (2, ReductionError("x"))])
    assert mixed.exit_code == EXIT_SOLVER_ERROR
    assert "k=2" in str(mixed)


# === VALIDATE ===

def test_validate_ok():
    raw = validate([1.0, 2.0], [1.0, 1.0], 1.0)
    assert raw.n == 2


@pytest.mark.parametrize("d, z, rho", [
    ([1.0], [1.0, 2.0], 1.0),
    ([1.0, 2.0], [1.0, 1.0], 0.0),
    ([1.0, np.nan], [1.0, 1.0], 1.0),
    ([1.0, 2.0], [1.0, 1.0], np.inf),
    ([], [], 1.0),
])
def test_validate_rejects(d, z, rho):
    with pytest.raises(ValidationError):
        validate(d, z, rho)


# === REDUCE ===

def test_reduce_pure_reordering():
    red = reduce([3.0, 1.0, 2.0], [1.0, 1.0, 1.0], 1.0)
    np.testing.assert_array_equal(red.permutation, [0, 2, 1])
    np.testing.assert_array_equal(red.core.d, [3.0, 2.0, 1.0])
    assert red.deflated == () and red.rotations == () and not red.negated


def test_reduce_zero_zeta():
    red = reduce([2.0, 1.0], [1.0, 0.0], 1.0)
    assert len(red.deflated) == 1
    p = red.deflated[0]
    assert p.value == 1.0 and p.source == "zero_z"
    np.testing.assert_array_equal(p.vector, [0.0, 1.0])
    np.testing.assert_array_equal(red.core.d, [2.0])
    np.testing.assert_array_equal(red.core.z, [1.0])


def test_reduce_tie_rotation():
    red = reduce([2.0, 2.0], [3.0, 4.0], 1.0)
    assert len(red.rotations) == 1
    rot = red.rotations[0]
    assert rot.c == pytest.approx(0.6) and rot.s == pytest.approx(0.8)
    assert red.deflated[0].value == 2.0
    np.testing.assert_array_equal(red.core.d, [2.0])
    assert red.core.z[0] == pytest.approx(5.0)
    # deflated vector is an eigenvector of the original matrix
    A = materialize(validate([2.0, 2.0], [3.0, 4.0], 1.0))
    v = red.deflated[0].vector
    np.testing.assert_allclose(A @ v, 2.0 * v, atol=1e-14)


def test_reduce_negative_rho():
    red = reduce([1.0, 2.0], [1.0, 1.0], -1.0)
    assert red.negated
    assert red.core.rho == 1.0
    # the sign transform gives -d = [-1, -2], already decreasing
    np.testing.assert_array_equal(red.core.d, [-1.0, -2.0])
    np.testing.assert_array_equal(red.permutation, [0, 1])


def test_reduce_is_identity_on_core(rng):
    d = np.sort(rng.standard_normal(7))[::-1]
    z = rng.standard_normal(7)
    red = reduce(d, z, 2.0)
    again = reduce(red.core.d, red.core.z, red.core.rho)
    np.testing.assert_array_equal(again.core.d, red.core.d)
    np.testing.assert_array_equal(again.core.z, red.core.z)
    np.testing.assert_array_equal(again.permutation, np.arange(7))
    assert again.deflated == ()


def test_reduce_counts_add_up():
    d = np.array([3.0, 1.0, 3.0, 0.5, 2.0, 1.0])
    z = np.array([1.0, 0.0, 2.0, 1.0, 0.0, 1.0])
    red = reduce(d, z, 1.0)
    assert red.core.n + len(red.deflated) == 6
    assert red.core.n == 3      # the two 3s tie; the second 1 only loses its partner to the zero
    assert len(red.rotations) == 1


def test_reduce_with_deflation_tolerance():
    red = reduce([3.0, 2.0, 1.0], [1.0, 1e-20, 1.0], 1.0, deflation_tol=1e-16)
    assert red.core.n == 2
    assert red.deflated[0].value == 2.0


def test_reassembly_reproduces_matrix(rng):
    # ties, zeros and a negative rho at once
    d = np.array([1.0, 4.0, 1.0, -2.0, 4.0, 0.5, 3.0])
    z = rng.standard_normal(7)
    z[5] = 0.0
    rho = -0.7
    red = reduce(d, z, rho)
    A = materialize(validate(d, z, rho))
    core = red.core
    Acore = materialize(core)
    sign = -1.0 if red.negated else 1.0

    # Q maps core and deflated coordinates back to input coordinates
    Q = np.column_stack([expand(red, np.eye(core.n)), *[p.vector for p in red.deflated]])
    blocks = np.zeros((7, 7))
    blocks[:core.n, :core.n] = sign * Acore
    for j, p in enumerate(red.deflated):
        blocks[core.n + j, core.n + j] = p.value
    norm = np.linalg.norm(A, 2)
    np.testing.assert_allclose(Q @ blocks @ Q.T, A, atol=8 * 7 * EPS_M * norm)
    np.testing.assert_allclose(Q.T @ Q, np.eye(7), atol=8 * 7 * EPS_M)


def test_expand_vector_and_matrix_agree():
    red = reduce([2.0, 2.0, 1.0], [3.0, 4.0, 1.0], 1.0)
    Y = np.array([[0.6, 0.8], [0.8, -0.6]])
    cols = expand(red, Y)
    for k in range(2):
        np.testing.assert_array_equal(expand(red, Y[:, k]), cols[:, k])


# === MATERIALIZE / INTERLACING ===

def test_materialize():
    np.testing.assert_array_equal(materialize(DPR1Matrix([2.0, 1.0], [1.0, 1.0], 1.0)), [[3, 1], [1, 2]])
    np.testing.assert_array_equal(materialize(DPR1Matrix([5.0], [2.0], 1.0)), [[9.0]])
    A = materialize(DPR1Matrix([1e10, 5.0], [1e10, 1.0], 1.0))
    assert A[0, 0] == 1e10 + 1e20


def test_is_interlaced():
    assert is_interlaced([4.0, 1.5], [2.0, 1.0])
    assert not is_interlaced([4.0, 2.0], [2.0, 1.0])
    assert not is_interlaced([1.5, 4.0], [2.0, 1.0])


def test_interlacing_of_exact_pairs():
    d = [1.0, 0.0]
    # 1 + 1e-20 rounds to the pole, the pair does not
    assert not is_interlaced([1.0 + 1e-20, -0.5], d)
    assert is_interlaced_exact([1.0, 0.0], [1e-20, 0.5], d)
    assert not is_interlaced_exact([1.0, 0.0], [-1e-20, 0.5], d)
    assert not is_interlaced_exact([1.0, 1.0], [1.0, 0.0], d)
