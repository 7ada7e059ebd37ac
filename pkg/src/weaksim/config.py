"""Configuration constants for the weak measurement toolkit"""

from pathlib import Path

# From src/weaksim/config.py, go up 2 levels to reach project root
PROJECT_ROOT = Path(__file__).resolve().parents[2]

# Linear algebra tolerances
ROLE_TOL = 1e-10  # unitary / hermitian / projector identities, entrywise
NORM_TOL = 1e-10  # |<x|x> - 1| for StateVector
DEGENERACY_TOL = 1e-8  # eigenvalues closer than this share one projector

# Scenario / meter thresholds
VANISHING_AMPLITUDE = 1e-12  # reject |<f|U|in>| below this
BRANCH_PRUNE_TOL = 1e-14  # drop branches whose component norm is below this
ZERO_POSTSELECTION = 1e-15  # postselection probability treated as zero

# Meter defaults (hbar = 1)
DEFAULT_SIGMA = 1.0
DEFAULT_G = 0.05

# Presence verdicts
DEFAULT_ZERO_TOL = 1e-9  # analytic weak values
DEFAULT_ZERO_TEST_K = 3.0  # Monte Carlo: within k standard errors of zero => ABSENT

# Monte Carlo
MIN_TRIALS = 100
DEFAULT_TRIALS = 100_000
DEFAULT_SEED = 42
DEFAULT_WORKERS = 1
TRIAL_BLOCK_SIZE = 65_536  # fixed block boundaries keep results worker-count independent
SAMPLING_SPAN_SIGMAS = 8.0  # inverse-CDF bracket: [min shift - 8 sigma, max shift + 8 sigma]
BISECTION_STEPS = 64
SAMPLING_GRID_POINTS = 8192  # tabulated CDF of the first meter, shared by every trial
SAMPLING_CHUNK_ELEMENTS = 1 << 22  # cap on trials x branches^2 held at once while bisecting

# Convergence sweeps
MIN_SWEEP_POINTS = 3
FIT_RESIDUAL_WARN = 1e-3

# Output
TEXT_SIGNIFICANT_DIGITS = 12
REPORT_SCHEMA_VERSION = "1.0"
