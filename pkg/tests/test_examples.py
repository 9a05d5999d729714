"""Worked examples and random suites checked against the high-precision oracle."""

import numpy as np
import pytest

import gallery
from cli import compute_measures, run_bench
from config import EPS_M
from core import is_interlaced_exact
from oracle import componentwise_error, oracle_eigvals, oracle_eigvec, relative_error
from solver import SolverConfig, eig_all, solve
from conftest import as_matrix

NO_DD = SolverConfig(use_double=False)


def dd_count(spectrum) -> int:
    return sum(dg.used_double_b for dg in spectrum.diagnostics)


# === EXAMPLE 1 ===

def test_example_one_eigenvalues(ex1, oracle_cache):
    spectrum = eig_all(ex1)
    ref = oracle_cache(ex1)
    for k in range(6):
        assert relative_error(spectrum.lam[k], ref[k]) <= 4 * EPS_M, f"lambda_{k + 1}"
    assert f"{spectrum.lam[1]:.15e}" == "5.000000000100000e+00"


def test_example_one_tiny_eigenpair(ex1, oracle_cache):
    spectrum = eig_all(ex1)
    pair = spectrum.pair(3)
    assert pair.sigma == 0.0
    assert pair.v[3] == pytest.approx(-1.0, rel=1e-15)
    assert pair.v[2] == pytest.approx(2.499999999749999e-15, rel=1e-15)
    v_ref = oracle_eigvec(ex1, oracle_cache(ex1)[3])
    assert componentwise_error(pair.v, v_ref) <= 8 * EPS_M


def test_example_one_diagnostics(ex1):
    spectrum = eig_all(ex1)
    assert spectrum.diagnostics[0].used_remedy == "R2"
    assert dd_count(spectrum) == 0
    O, R = compute_measures(ex1, spectrum.lam, spectrum.V)
    assert O <= 1 and R <= 1


# === EXAMPLE 2 ===

def test_example_two_eigenvalues(ex2, oracle_cache):
    spectrum = eig_all(ex2)
    assert abs(spectrum.lam[0] - (11 + 24 * EPS_M)) <= 8 * EPS_M
    assert relative_error(spectrum.lam[0], oracle_cache(ex2)[0]) <= 4 * EPS_M
    np.testing.assert_array_equal(spectrum.lam[1:], [1 + 39 * EPS_M, 1 + 25 * EPS_M, 1 + 11 * EPS_M])


def test_example_two_pairs_carry_extra_digits(ex2, oracle_cache):
    spectrum = eig_all(ex2)
    ref = oracle_cache(ex2)
    for k in range(1, 4):
        assert relative_error(spectrum.pair(k).exact_sum(), ref[k]) <= 1e-29


def test_example_two_eigenvectors(ex2, oracle_cache):
    spectrum = eig_all(ex2)
    ref = oracle_cache(ex2)
    for k in range(4):
        assert componentwise_error(spectrum.V[:, k], oracle_eigvec(ex2, ref[k])) <= 1e-14


# === EXAMPLE 3 ===

def test_example_three_is_accurate_with_double_double(ex3, oracle_cache):
    spectrum = eig_all(ex3)
    ref = oracle_cache(ex3)
    assert dd_count(spectrum) >= 3
    for k in range(4):
        assert relative_error(spectrum.lam[k], ref[k]) <= 8 * EPS_M, f"lambda_{k + 1}"
        assert componentwise_error(spectrum.V[:, k], oracle_eigvec(ex3, ref[k])) <= 1e-13
    O, R = compute_measures(ex3, spectrum.lam, spectrum.V)
    assert O <= 1 and R <= 1


# === EXAMPLE 4 ===

@pytest.mark.parametrize("beta", [1e-8, 1e-15])
def test_example_four_uses_double_double_inside(beta):
    raw = gallery.ex4(beta)
    spectrum = solve(raw.d, raw.z, raw.rho)
    assert sum(dg is not None and dg.used_double_b for dg in spectrum.diagnostics) == raw.n - 1
    # the exterior eigenvalue near 10/3 is well conditioned on its own
    assert not spectrum.diagnostics[0].used_double_b


@pytest.mark.parametrize("beta", [1e-3, 1e-8, 1e-15])
def test_example_four_orthogonality_with_double_double(beta):
    raw = gallery.ex4(beta)
    dd = solve(raw.d, raw.z, raw.rho)
    O, R = compute_measures(raw, dd.lam, dd.V)
    assert O <= 1 and R <= 0.5


@pytest.mark.parametrize("beta, floor", [(1e-3, 1.0), (1e-8, 1e3)])
def test_example_four_without_double_double(beta, floor):
    raw = gallery.ex4(beta)
    dd = solve(raw.d, raw.z, raw.rho)
    nd = solve(raw.d, raw.z, raw.rho, NO_DD)
    O_nd, _ = compute_measures(raw, nd.lam, nd.V)
    assert O_nd >= floor
    # only the vectors suffer, the eigenvalues agree to the last bit or so
    assert np.max(np.abs(nd.lam - dd.lam) / np.abs(dd.lam)) <= 5e-16


def test_example_four_double_double_overhead():
    report = run_bench(gallery.ex4(1e-8), repeat=3)
    assert report["dd_count"] == report["n"] - 1
    assert report["ratio"] <= 3.0


@pytest.mark.slow
def test_example_four_without_double_double_tiny_beta():
    raw = gallery.ex4(1e-15)
    nd = solve(raw.d, raw.z, raw.rho, NO_DD)
    O_nd, _ = compute_measures(raw, nd.lam, nd.V)
    assert O_nd >= 1e9


@pytest.mark.slow
@pytest.mark.parametrize("beta", [1e-3, 1e-8, 1e-15])
def test_example_four_against_oracle(beta):
    raw = gallery.ex4(beta)
    spectrum = solve(raw.d, raw.z, raw.rho)
    core = spectrum.reduction.core
    ref = oracle_eigvals(core)
    for k in range(raw.n):
        assert relative_error(spectrum.lam[k], ref[k]) <= 8 * EPS_M


# === RANDOM SUITES ===

def check_random_matrix(a, oracle_cache):
    spectrum = eig_all(a)
    ref = oracle_cache(a)
    assert is_interlaced_exact(spectrum.sigma, spectrum.mu, a.d)
    O, R = compute_measures(a, spectrum.lam, spectrum.V)
    assert O <= 1 and R <= 1
    for k in range(a.n):
        assert relative_error(spectrum.lam[k], ref[k]) <= 1e3 * EPS_M, f"lambda_{k + 1}"
        v_ref = oracle_eigvec(a, ref[k])
        assert componentwise_error(spectrum.V[:, k], v_ref) <= 1e3 * EPS_M, f"v_{k + 1}"


@pytest.mark.parametrize("n, seed", [(20, 0), (35, 1), (50, 2), (32, 27)])
def test_random_spectra(n, seed, oracle_cache):
    check_random_matrix(as_matrix(gallery.random_dpr1(n, seed=seed)), oracle_cache)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(100))
def test_random_spectra_full(seed, oracle_cache):
    n = 2 + seed % 49
    check_random_matrix(as_matrix(gallery.random_dpr1(n, seed=1000 + seed)), oracle_cache)
