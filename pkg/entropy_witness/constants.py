"""Constants and mappings for the entropy-witness package."""

from __future__ import annotations

# Numerical tolerances
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-9
NEGATIVE_EIGENVALUE_TOL = 1e-9
PROBABILITY_NEGATIVE_TOL = 1e-12
PROBABILITY_SUM_TOL = 1e-9
NORM_TOL = 1e-10
PROJECTOR_EQUAL_TOL = 1e-8
SIGN_EIGENVALUE_TOL = 1e-8
RANK_TOL = 1e-8
ZERO_EIGENVALUE_TOL = 1e-12
DIAGONAL_TIE_TOL = 1e-12
BISECTION_XTOL = 1e-12
WEIGHT_SUM_TOL = 1e-9
FEASIBILITY_TOL = 1e-9

# Enumeration guards
MAX_STRATEGY_CELLS = 16  # n * l
MAX_ENUMERATION = 2**22
MAX_COMBINATIONS = 10**6

# Canonical witnesses, rows indexed by preparation x, columns by measurement y
CANONICAL_WITNESSES: dict[str, list[list[float]]] = {
    "I3": [[1, 1], [1, -1], [-1, 0]],
    "I4": [[1, 1, 1], [1, 1, -1], [1, -1, 0], [-1, 0, 0]],
    "R4": [[1, 1], [1, -1], [-1, 1], [-1, -1]],
}

# Optimizer defaults
DEFAULT_STARTS = 64
DEFAULT_MAX_ITERS = 4000
DEFAULT_PENALTY_SCHEDULE: tuple[float, ...] = (10.0, 100.0, 1000.0)
DEFAULT_OBJECTIVE_TOL = 1e-8
DEFAULT_CONSTRAINT_TOL = 1e-6
POLISH_MAX_STEPS = 50
GRADIENT_STEP = 1e-7
CURVE_MONOTONE_TOL = 2e-3

# Simulation defaults
DEFAULT_PAIR_RATE = 900.0
DEFAULT_DURATION = 30.0
DEFAULT_JITTER_DEG = 0.5
DEFAULT_DARK_RATE = 0.0
LEAKAGE_TOL = 1e-6

# Tomography
MLE_MAX_ITERS = 2000
MLE_TOL = 1e-9
MLE_SEED_MIXING = 1e-6

# Coincidence port pairs, in CSV column order
PORTS: tuple[str, ...] = ("ab", "ad", "cb", "cd")

# Classical mode: basis state |m> arrives at this port pair
MESSAGE_PORTS: tuple[str, ...] = ("ab", "cb", "cd", "ad")

# Expectation estimators: port pair -> sign in the numerator
ESTIMATORS: dict[str, dict[str, int]] = {
    "quantum-I3": {"ab": -1, "cb": 1, "cd": 1},
    "quantum-I4": {"ab": -1, "cb": 1, "cd": 1, "ad": 1},
    "quantum-R4": {"ab": -1, "cb": 1, "cd": 1, "ad": 1},
    "classical-I3-M1": {"ab": 1, "cb": 1, "cd": -1},
    "classical-I3-M2": {"ab": 1, "cb": -1, "cd": 1},
    "classical-I4-M1": {"ab": 1, "cb": 1, "cd": 1, "ad": -1},
    "classical-I4-M2": {"ab": 1, "cb": 1, "cd": -1, "ad": 1},
    "classical-I4-M3": {"ab": 1, "cb": -1, "cd": 1, "ad": 1},
    "classical-R4-M1": {"ab": 1, "cb": 1, "cd": -1, "ad": -1},
    "classical-R4-M2": {"ab": 1, "cb": -1, "cd": 1, "ad": -1},
}

CASES: tuple[str, ...] = ("I3", "I4", "R4")
MODES: tuple[str, ...] = ("quantum", "classical")

# Regex patterns
WITNESS_NAME_PATTERN = r"^(?P<name>[A-Za-z][A-Za-z0-9_-]*)$"
GRID_PATTERN = (
    r"^\s*(?P<start>[-+0-9.eE]+)\s*:\s*(?P<stop>[-+0-9.eE]+)"
    r"\s*:\s*(?P<points>[0-9]+)\s*$"
)

# Report formatting
CSV_FLOAT_FORMAT = "{:.6g}"

# --check tolerances
TABLE_ENTROPY_TOL = 1e-3
TABLE_QUANTUM_TOL = 5e-3
TABLE_GAP_TOL = 1e-2
CERTIFICATE_VALUE_TOL = 2e-3
CERTIFICATE_ENTROPY_TOL = 1e-3
BOUND_TOL = 1e-3
STRICT_MARGIN = 1e-4
EXACT_SIM_TOL = 2e-3
SAMPLED_SIM_TOL = 5e-2
CURVE_ORDER_TOL = 5e-3

# Default curve resolution
DEFAULT_CURVE_POINTS = 20
