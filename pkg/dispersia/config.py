"""
Centralized configuration for the Dispersia laboratory.

Single source of truth for:
  - Paths (defaults file, bundled run configs, fixture output)
  - Numerical defaults loaded from lab_defaults.toml
  - Thread cap from DISPERSIA_THREADS
  - Logging configuration
"""

import logging
import os
from pathlib import Path

try:
    import tomllib  # Python 3.11+
except ImportError:
    import tomli as tomllib  # fallback for Python 3.10

# ─── Paths ───────────────────────────────────────────────────────────────────

BASE_DIR = Path(__file__).parent
DEFAULTS_PATH = BASE_DIR / "lab_defaults.toml"
CONFIGS_DIR = BASE_DIR / "configs"
FIXTURES_DIR = BASE_DIR / "fixtures"

with open(DEFAULTS_PATH, "rb") as f:
    _D = tomllib.load(f)


# ─── Supported Geometry ──────────────────────────────────────────────────────

SUPPORTED_DIMENSIONS = (1, 2, 3)
MAX_COORDINATE = 2**20  # |k_i| bound for exact integer norms


# ─── Synthesis Grids ─────────────────────────────────────────────────────────

SPACE_OVERSAMPLING = _D["grid"]["space_oversampling"]
TIME_SAMPLES_PER_OSCILLATION = _D["grid"]["time_samples_per_oscillation"]
MAX_DENSE_POINTS = _D["grid"]["max_dense_points"]


# ─── Windows ─────────────────────────────────────────────────────────────────

WINDOW_FACTOR = _D["windows"]["window_factor"]
WINDOW_POINTS = _D["windows"]["window_points"]
WINDOW_TIME_SAMPLES = _D["windows"]["window_time_samples"]
CLUSTER_EPSILON = _D["windows"]["cluster_epsilon"]
CLUSTER_SAMPLES = _D["windows"]["cluster_samples"]
SHELL_WIDTH = _D["windows"]["shell_width"]


# ─── Tolerances ──────────────────────────────────────────────────────────────

ORTHONORMALITY_TOL = _D["tolerances"]["orthonormality"]
DENSITY_FLOOR = _D["tolerances"]["density_floor"]
IDENTITY_REL_TOL = _D["tolerances"]["identity_rel"]


# ─── Decoupling / Restriction ────────────────────────────────────────────────

DECOUPLING_NODES_PER_SIDE = _D["decoupling"]["nodes_per_side"]
DECOUPLING_SAMPLES_PER_UNIT = _D["decoupling"]["samples_per_unit"]
DECOUPLING_MIN_AXIS_POINTS = _D["decoupling"]["min_axis_points"]
DECOUPLING_MAX_AXIS_POINTS = _D["decoupling"]["max_axis_points"]
DECOUPLING_WEIGHT_POWER = _D["decoupling"]["weight_power"]
DECOUPLING_WEIGHT_BOX = _D["decoupling"]["weight_box_factor"]
RESTRICTION_SAMPLES = _D["decoupling"]["restriction_samples"]
RESTRICTION_TRIALS = _D["decoupling"]["restriction_trials"]
DECOUPLING_GROWTH_EXPONENT = _D["decoupling"]["growth_exponent"]


# ─── Duality ─────────────────────────────────────────────────────────────────

DUALITY_SLACK = _D["duality"]["slack"]
DUALITY_SAMPLES = _D["duality"]["samples"]
DUALITY_MAX_INPUTS = _D["duality"]["max_inputs"]


# ─── Sphere ──────────────────────────────────────────────────────────────────

SPHERE_PHI_SAMPLES = _D["sphere"]["phi_samples"]
SPHERE_NORMALIZATION_TOL = _D["sphere"]["normalization_tol"]


# ─── Hartree ─────────────────────────────────────────────────────────────────

HARTREE_DEALIAS_FACTOR = _D["hartree"]["dealias_factor"]
BLOWUP_GROWTH = _D["hartree"]["blowup_growth"]
REFERENCE_FACTOR = _D["hartree"]["reference_factor"]
HARTREE_MAX_STATES = _D["hartree"]["max_states"]
HARTREE_MAX_BOX = _D["hartree"]["max_box"]


# ─── Runner ──────────────────────────────────────────────────────────────────

RESULT_SCHEMA_VERSION = _D["runner"]["schema_version"]
DEFAULT_SEED = _D["runner"]["default_seed"]
DEFAULT_TOLERANCE = _D["runner"]["default_tolerance"]


# ─── Logging ─────────────────────────────────────────────────────────────────

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def setup_logging(level=logging.INFO):
    """Configure logging for the application."""
    logging.basicConfig(
        level=level,
        format=LOG_FORMAT,
        datefmt=LOG_DATE_FORMAT,
    )


def get_logger(name: str) -> logging.Logger:
    """Get a named logger instance."""
    return logging.getLogger(name)


# ─── Parallelism ─────────────────────────────────────────────────────────────

def thread_cap() -> int:
    """
    Worker count from DISPERSIA_THREADS (default 1).

    Read on every call so tests and the CLI can change it at runtime.
    Invalid values fall back to 1 with a warning.
    """
    raw = os.environ.get("DISPERSIA_THREADS", "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        get_logger(__name__).warning(
            "DISPERSIA_THREADS=%r is not an integer; using 1", raw
        )
        return 1
    if value < 1:
        get_logger(__name__).warning(
            "DISPERSIA_THREADS=%d must be >= 1; using 1", value
        )
        return 1
    return value
