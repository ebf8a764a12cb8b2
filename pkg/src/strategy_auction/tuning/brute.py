"""Brute-force tuning oracle: enumerate every assignment, solve the inner LP.

Test-only reference for the branch-and-bound solver.  For a fixed
assignment the program collapses to minimizing the epigraph variable Q
over the boxed weights; the global best across assignments is optimal.
"""

from __future__ import annotations

import itertools
import time

import numpy as np

from ..domain import ScoringWeights
from ..scoring import net_coefficients
from .model import SizeGuardError, SolverStats, TuningInstance, TuningSolution
from .simplex import OPTIMAL, solve_lp

ENUMERATION_LIMIT = 100_000


def inner_lp_objective(
    instance: TuningInstance, assignment: dict[str, str]
) -> tuple[float, dict[str, float], int]:
    """Min over boxed weights of the max assigned net; returns (obj, weights, iters)."""
    judges = instance.judge_ids
    w_names = ["w_c", "w_h"] + [f"w_j:{j}" for j in judges]
    n = len(w_names) + 1  # weights then Q
    q_col = n - 1

    rows = []
    for t in instance.tasks:
        row = np.zeros(n)
        coef_c, coef_h, coef_j = net_coefficients(
            instance.rows[(t, assignment[t])], judges, instance.ablation_mask
        )
        row[0] = coef_c
        row[1] = coef_h
        row[2:2 + len(judges)] = coef_j
        row[q_col] = -1.0
        rows.append(row)

    c = np.zeros(n)
    c[q_col] = 1.0
    wb = instance.weight_bound
    bounds = [(-wb, wb)] * len(w_names) + [(None, None)]
    res = solve_lp(c, a_ub=np.array(rows), b_ub=np.zeros(len(rows)), bounds=bounds)
    if res.status != OPTIMAL:
        raise RuntimeError(f"inner LP unexpectedly {res.status}")
    weights = {name: float(res.x[k]) for k, name in enumerate(w_names)}
    return float(res.fun), weights, res.iterations


def brute_force_tune(instance: TuningInstance) -> TuningSolution:
    """Globally optimal tuning by exhaustive assignment enumeration."""
    n_assignments = len(instance.agents) ** len(instance.tasks)
    if n_assignments > ENUMERATION_LIMIT:
        raise SizeGuardError(
            f"{n_assignments} assignments exceeds the brute-force limit of {ENUMERATION_LIMIT}"
        )
    start = time.perf_counter()
    best_obj = float("inf")
    best_assignment: dict[str, str] | None = None
    best_weights: dict[str, float] | None = None
    lp_iters = 0
    for combo in itertools.product(instance.agents, repeat=len(instance.tasks)):
        assignment = dict(zip(instance.tasks, combo))
        obj, weights, iters = inner_lp_objective(instance, assignment)
        lp_iters += iters
        if obj < best_obj - 1e-12:
            best_obj, best_assignment, best_weights = obj, assignment, weights
    wall = time.perf_counter() - start

    judges = instance.judge_ids
    weights = ScoringWeights(
        w_c=best_weights["w_c"],
        w_h=best_weights["w_h"],
        w_judge={j: best_weights[f"w_j:{j}"] for j in judges},
        ablation_mask=instance.ablation_mask,
    )
    return TuningSolution(
        weights=weights,
        assignments=best_assignment,
        objective=best_obj,
        stats=SolverStats(nodes=n_assignments, lp_iterations=lp_iters, wall_time=wall, optimal=True),
    )
