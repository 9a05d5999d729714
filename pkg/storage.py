"""
Storage module for dpr1eig.

Handles the two on-disk formats: the MatrixFile text format for
D + rho z z^T input and the JSON ResultFile written by the solver.
Floats are always printed with repr(), the shortest decimal string that
reads back to the same binary64 value, so both formats are lossless.
"""

import json
import os

import numpy as np

from config import MATRIX_HEADER, RESULT_FORMAT, logger
from core import MatrixFileError, RawDPR1, validate
from ddarith import two_sum


# === MATRIX FILE ===

def format_matrix(d, z, rho) -> str:
    """MatrixFile text: header, rho line, then one "<d_i> <zeta_i>" line per row."""
    d = np.asarray(d, dtype=float)
    z = np.asarray(z, dtype=float)
    lines = [f"{MATRIX_HEADER} n={len(d)}", f"rho {float(rho)!r}"]
    lines.extend(f"{float(di)!r} {float(zi)!r}" for di, zi in zip(d, z))
    return "\n".join(lines) + "\n"


def _parse_float(token: str, line: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise MatrixFileError(f"not a number: {token!r}", line) from None


def parse_matrix(text: str) -> RawDPR1:
    """Parse MatrixFile text. Errors carry the 1-based line number."""
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise MatrixFileError("empty file", 1)

    head = lines[0].split()
    expected = MATRIX_HEADER.split()
    if head[:len(expected)] != expected or len(head) != len(expected) + 1 or not head[-1].startswith("n="):
        raise MatrixFileError(f"bad header {lines[0]!r}, expected '{MATRIX_HEADER} n=<n>'", 1)
    try:
        n = int(head[-1][2:])
    except ValueError:
        raise MatrixFileError(f"bad size {head[-1]!r}", 1) from None
    if n < 1:
        raise MatrixFileError(f"n must be >= 1, got {n}", 1)

    if len(lines) < 2:
        raise MatrixFileError("missing rho line", 2)
    parts = lines[1].split()
    if len(parts) != 2 or parts[0] != "rho":
        raise MatrixFileError(f"expected 'rho <value>', got {lines[1]!r}", 2)
    rho = _parse_float(parts[1], 2)

    rows = lines[2:]
    if len(rows) != n:
        line = len(lines) + 1 if len(rows) < n else n + 3
        raise MatrixFileError(f"header says n={n} but found {len(rows)} data lines", line)
    d = np.empty(n)
    z = np.empty(n)
    for j, row in enumerate(rows):
        lineno = j + 3
        parts = row.split()
        if len(parts) != 2:
            raise MatrixFileError(f"expected '<d> <zeta>', got {row!r}", lineno)
        d[j] = _parse_float(parts[0], lineno)
        z[j] = _parse_float(parts[1], lineno)

    try:
        return validate(d, z, rho)
    except MatrixFileError:
        raise
    except ValueError as e:
        raise MatrixFileError(str(e)) from e


def read_matrix(path: str) -> RawDPR1:
    if not os.path.exists(path):
        raise MatrixFileError(f"file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    m = parse_matrix(text)
    logger.info(f"read {path}: n={m.n}, rho={m.rho!r}")
    return m


def write_matrix(path: str, d, z, rho) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_matrix(d, z, rho))
    logger.info(f"wrote matrix file {path}: n={len(d)}")


# === RESULT FILE ===

def build_result(spectrum, measures: dict | None = None) -> dict:
    """ResultFile document for a full Spectrum from solver.solve()."""
    doc = {
        "format": RESULT_FORMAT,
        "n": spectrum.n,
        "lambda": [float(x) for x in spectrum.lam],
        "lambda_dd": [_exact_sum(s, m) for s, m in zip(spectrum.sigma, spectrum.mu)],
        "sigma": [float(x) for x in spectrum.sigma],
        "mu": [float(x) for x in spectrum.mu],
        "V": [[float(x) for x in row] for row in spectrum.V],
        "diagnostics": [dg.as_dict() if dg is not None else None for dg in spectrum.diagnostics],
    }
    if measures is not None:
        doc["measures"] = {k: float(v) for k, v in measures.items()}
    return doc


def build_pair_result(k: int, pair, diag) -> dict:
    """ResultFile document for a single eigenpair; k is 1-based as on the command line."""
    hi, lo = _exact_sum(pair.sigma, pair.mu)
    return {
        "format": RESULT_FORMAT,
        "n": len(pair.v),
        "k": k,
        "lambda": [float(pair.lam)],
        "lambda_dd": [[hi, lo]],
        "sigma": [float(pair.sigma)],
        "mu": [float(pair.mu)],
        "V": [[float(x)] for x in pair.v],
        "diagnostics": [diag.as_dict() if diag is not None else None],
    }


def build_oracle_result(values, digits: int, lambda_digits: list) -> dict:
    """Golden-file document: oracle eigenvalues rounded to binary64 plus their decimal strings."""
    return {
        "format": RESULT_FORMAT,
        "n": len(values),
        "oracle_digits": digits,
        "lambda": [float(x) for x in values],
        "lambda_digits": lambda_digits,
    }


def _exact_sum(sigma: float, mu: float) -> list:
    s = two_sum(float(sigma), float(mu))
    return [float(s.hi), float(s.lo)]


def dump_result(doc: dict) -> str:
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


def write_result(path: str | None, doc: dict) -> str:
    """Write a ResultFile (to stdout when path is None or '-'); returns the text."""
    text = dump_result(doc)
    if path in (None, "-"):
        print(text, end="")
    else:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        logger.info(f"wrote result file {path}")
    return text


def read_result(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    if doc.get("format") != RESULT_FORMAT:
        raise MatrixFileError(f"{path}: not a {RESULT_FORMAT} document")
    return doc
