# src/config.py

import os
import logging

# Base directory for data
DATA_DIR = "data"
CORPUS_DIR = os.path.join(DATA_DIR, "corpus")
REPORTS_DIR = os.path.join(DATA_DIR, "reports")
CORPUS_SUFFIX = ".pcfr"

# Logging
LOG_LEVEL = logging.INFO
LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'

# Evaluation
DEFAULT_FUEL = 1_000_000  # Reduction steps before a run counts as divergent
DEFAULT_STRATEGY = "head"
DEFAULT_FIX_BOUND = 8  # Largest unfolding tried by the pre-trace fix rule
FUEL_ENV_VAR = "PCFR_FUEL"

# Finite-difference oracle
DEFAULT_H_LADDER = (1e-4, 1e-5, 1e-6)
DEFAULT_PROBE_TOL = 1e-3  # Slope stabilization across the h ladder
DEFAULT_RTOL = 1e-4
DEFAULT_ATOL = 1e-6
MODE_AGREEMENT_RTOL = 1e-9  # Forward vs reverse gradients

# Trace lab
DEFAULT_RADIUS = 0.1
DEFAULT_PROBES = 32
DEFAULT_SEED = 42
DEFAULT_SAMPLES = 10_000
FAIL_POINTS_CAP = 100  # Fail points kept in a ScanReport
BALL_REJECTION_MAX_DIM = 3  # Above this, stability probes sample the box

# Reports
REPORT_SCHEMA_VERSION = 1


def resolve_default_fuel() -> int:
    """Returns DEFAULT_FUEL, or the PCFR_FUEL override when it is a positive integer."""
    raw = os.environ.get(FUEL_ENV_VAR)
    if raw is None:
        return DEFAULT_FUEL
    try:
        fuel = int(raw)
    except ValueError:
        logging.warning(f"Ignoring {FUEL_ENV_VAR}={raw!r}: not an integer.")
        return DEFAULT_FUEL
    if fuel < 1:
        logging.warning(f"Ignoring {FUEL_ENV_VAR}={fuel}: fuel must be at least 1.")
        return DEFAULT_FUEL
    return fuel
