"""
Configuration module for dpr1eig.

Loads environment variables, sets up logging, and defines the numeric
constants and solver defaults used across the package.

This is a leaf module: it does not import from any other local modules.
"""

import os
import logging

from dotenv import load_dotenv

# ── Environment variables ──────────────────────────────────────────────

load_dotenv()

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

# Threads never change the output, only the wall time
DEFAULT_THREADS = max(1, int(os.getenv("DPR1_THREADS", "1")))

# ── Logging ────────────────────────────────────────────────────────────

logging.basicConfig(
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    level=getattr(logging, LOG_LEVEL, logging.INFO)
)
logger = logging.getLogger("dpr1eig")

# ── Floating point ─────────────────────────────────────────────────────

EPS_M = 2.0 ** -52          # machine precision of binary64 as used in the error bounds

# ── Solver defaults ────────────────────────────────────────────────────

KAPPA_THRESHOLD_FACTOR = 10.0     # recompute b in double-double when kappa_nu > c*n
K_NU_THRESHOLD = 1e3              # remedies R1/R2 when K_nu exceeds this
ZERO_PROXIMITY_FACTOR = 1e-3      # |lambda| << distance to the neighbouring poles
MAX_BISECT_ITERS = 1100
EXTENDED_PRECISION_FACTOR = 1e6   # K_b >= factor/EPS_M cannot be carried by double-double

DEFLATION_TOL = 0.0
TIE_TOL = 0.0

# ── Oracle ─────────────────────────────────────────────────────────────

ORACLE_DIGITS = 34
GOLDEN_DIGITS = 50

# ── Generators ─────────────────────────────────────────────────────────

EXAMPLE4_N = 202
RANDOM_MIN_REL_GAP = 1e-3
RANDOM_Z_RANGE = (1e-8, 1e8)

# ── File formats ───────────────────────────────────────────────────────

MATRIX_HEADER = "dpr1 v1"
RESULT_FORMAT = "dpr1-result v1"

# ── Exit codes ─────────────────────────────────────────────────────────

EXIT_OK = 0
EXIT_PARSE_ERROR = 2
EXIT_SOLVER_ERROR = 3
EXIT_EXTENDED_PRECISION = 4
