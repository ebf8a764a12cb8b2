"""Weight tuning: min-max MILP, exact branch-and-bound solve, brute oracle."""

from .branch_bound import solve_exact
from .brute import brute_force_tune, inner_lp_objective
from .model import (
    DEFAULT_BIG_M,
    DEFAULT_WEIGHT_BOUND,
    BigMValidationError,
    MilpModel,
    SizeGuardError,
    SolverStats,
    TuningInstance,
    TuningSolution,
    build_milp,
    validate_big_m,
)
from .router import route_with_weights
from .simplex import LpResult, solve_lp

__all__ = [
    "DEFAULT_BIG_M",
    "DEFAULT_WEIGHT_BOUND",
    "BigMValidationError",
    "LpResult",
    "MilpModel",
    "SizeGuardError",
    "SolverStats",
    "TuningInstance",
    "TuningSolution",
    "brute_force_tune",
    "build_milp",
    "inner_lp_objective",
    "route_with_weights",
    "solve_exact",
    "solve_lp",
    "validate_big_m",
]
