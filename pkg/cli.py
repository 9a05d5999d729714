#!/usr/bin/env python3
"""
Command-line front end for dpr1eig.

Usage:
    python cli.py generate ex4 --beta 1e-8 -o ex4.dpr1
    python cli.py solve ex4.dpr1 --measures -o ex4.json
    python cli.py solve ex4.dpr1 --no-dd --k 2
    python cli.py measures ex4.dpr1 ex4.json
    python cli.py bench ex4 --beta 1e-8 --repeat 5
    python cli.py oracle ex2.dpr1 -o ex2.golden.json
    python cli.py compare ex4.dpr1 --baseline dense

Exit codes: 0 ok, 2 bad input, 3 solver failure, 4 extended precision required.
"""

import argparse
import dataclasses
import statistics
import sys
import time

import numpy as np

from config import DEFAULT_THREADS, EPS_M, EXIT_OK, GOLDEN_DIGITS, logger
from core import DPR1Error, RawDPR1, ValidationError, materialize, reduce
from gallery import GENERATORS, generate
from oracle import componentwise_error, format_digits, oracle_eigvals, to_float_array
from solver import SolverConfig, solve, solve_pair
from storage import (
    build_oracle_result, build_pair_result, build_result, format_matrix,
    read_matrix, read_result, write_result,
)


# === MEASURES ===

def _apply(a, v: np.ndarray) -> np.ndarray:
    """A v = D v + rho z (z^T v) without forming A."""
    d = np.asarray(a.d)
    z = np.asarray(a.z)
    if v.ndim == 1:
        return d * v + a.rho * z * (z @ v)
    return d[:, None] * v + a.rho * np.outer(z, z @ v)


def compute_measures(a, lam, V) -> tuple:
    """Orthogonality O and residual R, both scaled by n * EPS_M.

    O = max_i ||V^T v_i - e_i|| / (n eps),  R = max_i ||A v_i - lambda_i v_i|| / (n eps ||A||),
    with ||A|| = max |lambda_i|.
    """
    lam = np.asarray(lam, dtype=float)
    V = np.asarray(V, dtype=float)
    n = len(lam)
    if V.shape != (n, n) or len(a.d) != n:
        raise ValidationError(f"inconsistent sizes: n={n}, V{V.shape}, d({len(a.d)})")
    G = V.T @ V - np.eye(n)
    O = float(np.max(np.linalg.norm(G, axis=0))) / (n * EPS_M)
    Res = _apply(a, V) - V * lam[None, :]
    res = float(np.max(np.linalg.norm(Res, axis=0)))
    norm_a = float(np.max(np.abs(lam)))
    if norm_a == 0.0:
        R = 0.0 if res == 0.0 else float("inf")
    else:
        R = res / (n * EPS_M * norm_a)
    return O, R


# === HELPERS ===

def _config(args) -> SolverConfig:
    kwargs = {"use_double": not getattr(args, "no_dd", False)}
    if getattr(args, "kappa_factor", None) is not None:
        kwargs["kappa_threshold_factor"] = args.kappa_factor
    if getattr(args, "knu_threshold", None) is not None:
        kwargs["K_nu_threshold"] = args.knu_threshold
    return SolverConfig(**kwargs)


def _generator_params(args) -> dict:
    params = {}
    for name in ("beta", "n", "seed", "rho"):
        value = getattr(args, name, None)
        if value is not None:
            params[name] = value
    return params


def _dd_count(spectrum) -> int:
    return sum(1 for dg in spectrum.diagnostics if dg is not None and dg.used_double_b)


# === SUBCOMMANDS ===

def cmd_solve(args) -> int:
    raw = read_matrix(args.input)
    cfg = _config(args)
    if args.k is not None:
        if args.k > raw.n:
            raise ValidationError(f"--k {args.k} out of range for n={raw.n}")
        if args.measures:
            logger.warning("--measures is ignored with --k")
        pair, diag = solve_pair(raw.d, raw.z, raw.rho, args.k - 1, cfg)
        write_result(args.output, build_pair_result(args.k, pair, diag))
        return EXIT_OK

    t0 = time.perf_counter()
    spectrum = solve(raw.d, raw.z, raw.rho, cfg, threads=args.threads)
    logger.info(f"solved n={raw.n} in {time.perf_counter() - t0:.3f}s, dd used for {_dd_count(spectrum)} eigenpairs")
    measures = None
    if args.measures:
        O, R = compute_measures(raw, spectrum.lam, spectrum.V)
        measures = {"O": O, "R": R}
    write_result(args.output, build_result(spectrum, measures))
    return EXIT_OK


def cmd_generate(args) -> int:
    raw = generate(args.example, **_generator_params(args))
    text = format_matrix(raw.d, raw.z, raw.rho)
    if args.output in (None, "-"):
        print(text, end="")
    else:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
        logger.info(f"wrote {args.example} (n={raw.n}) to {args.output}")
    return EXIT_OK


def cmd_measures(args) -> int:
    raw = read_matrix(args.input)
    doc = read_result(args.result)
    if "V" not in doc or doc.get("k") is not None:
        raise ValidationError("measures need a full-spectrum result file")
    O, R = compute_measures(raw, doc["lambda"], doc["V"])
    print(f"O = {O!r}")
    print(f"R = {R!r}")
    return EXIT_OK


def run_bench(raw: RawDPR1, repeat: int = 3, threads: int = 1, cfg: SolverConfig | None = None) -> dict:
    """Median wall times with and without double-double and the dd-use count."""
    if repeat < 1:
        raise ValidationError(f"repeat must be >= 1, got {repeat}")
    base = cfg or SolverConfig()
    configs = {
        "dd": dataclasses.replace(base, use_double=True),
        "nd": dataclasses.replace(base, use_double=False),
    }
    times = {}
    spectra = {}
    for label, c in configs.items():
        samples = []
        for _ in range(repeat):
            t0 = time.perf_counter()
            spectra[label] = solve(raw.d, raw.z, raw.rho, c, threads=threads)
            samples.append(time.perf_counter() - t0)
        times[label] = statistics.median(samples)
    return {
        "n": raw.n,
        "repeat": repeat,
        "time_dd": times["dd"],
        "time_nd": times["nd"],
        "ratio": times["dd"] / times["nd"] if times["nd"] > 0 else float("inf"),
        "dd_count": _dd_count(spectra["dd"]),
    }


def cmd_bench(args) -> int:
    raw = generate(args.example, **_generator_params(args))
    report = run_bench(raw, args.repeat, args.threads, _config(args))
    print(f"{args.example}: n={report['n']}, repeat={report['repeat']}")
    print(f"  median with dd:    {report['time_dd']:.4f}s")
    print(f"  median without dd: {report['time_nd']:.4f}s")
    print(f"  overhead ratio:    {report['ratio']:.3f}")
    print(f"  eigenpairs using dd: {report['dd_count']} of {report['n']}")
    return EXIT_OK


def oracle_spectrum(raw: RawDPR1, digits: int) -> list:
    """Oracle eigenvalues of any (d, z, rho): core by bisection, deflated values exact. Decreasing."""
    red = reduce(raw.d, raw.z, raw.rho)
    values = []
    if red.core is not None:
        for lam in oracle_eigvals(red.core, digits):
            values.append(-lam if red.negated else lam)
    values.extend(p.value for p in red.deflated)
    return sorted(values, reverse=True)


def cmd_oracle(args) -> int:
    raw = read_matrix(args.input)
    values = oracle_spectrum(raw, args.digits)
    strings = [format_digits(v, args.digits) for v in values]
    write_result(args.output, build_oracle_result(to_float_array(values), args.digits, strings))
    return EXIT_OK


def _max_relative(a: np.ndarray, b: np.ndarray) -> float:
    scale = np.maximum(np.abs(b), np.finfo(float).tiny)
    return float(np.max(np.abs(a - b) / scale))


def compare_spectra(raw: RawDPR1, baseline: str = "nd", threads: int = 1) -> dict:
    """Largest eigenvalue and eigenvector-component differences between dd and a baseline."""
    ref = solve(raw.d, raw.z, raw.rho, SolverConfig(use_double=True), threads=threads)
    if baseline == "nd":
        other = solve(raw.d, raw.z, raw.rho, SolverConfig(use_double=False), threads=threads)
        lam, V = other.lam, other.V
    elif baseline == "dense":
        w, U = np.linalg.eigh(materialize(raw))
        lam, V = w[::-1], U[:, ::-1]
    else:
        raise ValidationError(f"unknown baseline {baseline!r}")
    vec = max(componentwise_error(V[:, k], ref.V[:, k]) for k in range(raw.n))
    return {"baseline": baseline, "eigenvalues": _max_relative(lam, ref.lam), "eigenvectors": vec}


def cmd_compare(args) -> int:
    raw = read_matrix(args.input)
    report = compare_spectra(raw, args.baseline, args.threads)
    print(f"baseline {report['baseline']} vs dd:")
    print(f"  max relative eigenvalue difference:           {report['eigenvalues']:.3e}")
    print(f"  max componentwise eigenvector difference:     {report['eigenvectors']:.3e}")
    return EXIT_OK


# === ARGUMENT PARSING ===

def _add_solver_flags(p):
    p.add_argument("--no-dd", action="store_true", help="never recompute b in double-double")
    p.add_argument("--kappa-factor", type=float, help="recompute b when kappa_nu > factor * n")
    p.add_argument("--knu-threshold", type=float, help="apply remedies when K_nu exceeds this")
    p.add_argument("--threads", type=int, default=DEFAULT_THREADS, help="worker threads")


def _add_generator_flags(p):
    p.add_argument("example", choices=sorted(GENERATORS), help="matrix to generate")
    p.add_argument("--beta", type=float, help="perturbation for ex3/ex4")
    p.add_argument("--n", type=int, help="order for ex4/random")
    p.add_argument("--seed", type=int, help="seed for random")
    p.add_argument("--rho", type=float, help="rho for random")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpr1eig", description="Forward stable DPR1 eigensolver")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a MatrixFile")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="ResultFile path (default stdout)")
    p.add_argument("--k", type=int, help="solve only the k-th eigenpair (1-based, decreasing)")
    p.add_argument("--measures", action="store_true", help="add orthogonality and residual measures")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("generate", help="write an example matrix")
    _add_generator_flags(p)
    p.add_argument("-o", "--output", help="MatrixFile path (default stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("measures", help="O and R of a result against its matrix")
    p.add_argument("input")
    p.add_argument("result")
    p.set_defaults(func=cmd_measures)

    p = sub.add_parser("bench", help="time solving with and without double-double")
    _add_generator_flags(p)
    p.add_argument("--repeat", type=int, default=3)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("oracle", help="high-precision reference eigenvalues")
    p.add_argument("input")
    p.add_argument("--digits", type=int, default=GOLDEN_DIGITS)
    p.add_argument("-o", "--output", help="golden file path (default stdout)")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("compare", help="dd against the non-dd run or a dense solver")
    p.add_argument("input")
    p.add_argument("--baseline", choices=("nd", "dense"), default="nd")
    p.add_argument("--threads", type=int, default=DEFAULT_THREADS)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "k", None) is not None and args.k < 1:
        print(f"error: --k must be >= 1, got {args.k}", file=sys.stderr)
        return ValidationError.exit_code
    try:
        return args.func(args)
    except DPR1Error as e:
        logger.error(f"{args.command} failed: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception(f"{args.command}: unexpected error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
