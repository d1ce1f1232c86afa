import os
from fractions import Fraction
from dotenv import load_dotenv

load_dotenv()


def _positive_int(name: str, default: str) -> int:
    raw = os.getenv(name, default)
    try:
        value = int(raw)
    except ValueError:
        raise RuntimeError(f"{name} must be an integer, got {raw!r}")
    if value <= 0:
        raise RuntimeError(f"{name} must be positive, got {value}")
    return value


# Run history store (only touched by `pack --record` and `history`)
DATABASE_URL = os.getenv("DATABASE_URL", "sqlite:///./kcopy_runs.db")

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

# Binary-search tolerance for best_ratio, kept exact
_tol_raw = os.getenv("DEFAULT_TOL", "1e-9")
try:
    DEFAULT_TOL = Fraction(_tol_raw)
except (ValueError, ZeroDivisionError):
    raise RuntimeError(f"DEFAULT_TOL must be a rational or decimal literal, got {_tol_raw!r}")
if DEFAULT_TOL <= 0:
    raise RuntimeError("DEFAULT_TOL must be positive")

# Cover planning
COVER_RESOLUTION_BITS = _positive_int("COVER_RESOLUTION_BITS", "64")
PLAN_VERIFY_SAMPLES = _positive_int("PLAN_VERIFY_SAMPLES", "1000")
PLANNER_MAX_STEPS = _positive_int("PLANNER_MAX_STEPS", "1000000")

# Verification sweeps; 1 means run sequentially in-process
MAX_WORKERS = _positive_int("MAX_WORKERS", "1")

# Exhaustive OPT is exponential, keep it to desk-sized instances
BRUTE_FORCE_MAX_ITEMS = _positive_int("BRUTE_FORCE_MAX_ITEMS", "12")
