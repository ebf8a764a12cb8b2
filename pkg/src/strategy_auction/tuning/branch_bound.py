"""Exact MILP solve: depth-first branch and bound over the assignment binaries.

Branching picks the most-fractional binary, ties broken by lowest task
index then lowest agent index (which is the flat variable order).  The
one-branch is explored first.  A rounding heuristic at the root (route
each task with the relaxation's weights, then price that assignment
exactly) seeds the incumbent so pruning bites early.  Fully sequential
and deterministic.
"""

from __future__ import annotations

import time

import numpy as np

from ..scoring import net
from .model import (
    MilpModel,
    SizeGuardError,
    SolverStats,
    TuningSolution,
    weights_from_vector,
)
from .simplex import INFEASIBLE, ITERATION_LIMIT, OPTIMAL, solve_lp

INT_TOL = 1e-7
PRUNE_TOL = 1e-9

DEFAULT_NODE_LIMIT = 200_000
GUIDELINE_BINARIES = 200


def _inner_lp(model: MilpModel, assignment: dict[str, str]):
    """Optimal weights for a fixed assignment: min Q over the boxed box."""
    instance = model.instance
    judges = instance.judge_ids
    from ..scoring import net_coefficients  # local to avoid cycle at import

    n = 2 + len(judges) + 1
    q_col = n - 1
    rows = []
    for t in instance.tasks:
        coef_c, coef_h, coef_j = net_coefficients(
            instance.rows[(t, assignment[t])], judges, instance.ablation_mask
        )
        row = np.zeros(n)
        row[0] = coef_c
        row[1] = coef_h
        row[2:2 + len(judges)] = coef_j
        row[q_col] = -1.0
        rows.append(row)
    c = np.zeros(n)
    c[q_col] = 1.0
    wb = instance.weight_bound
    bounds = [(-wb, wb)] * (n - 1) + [(None, None)]
    return solve_lp(c, a_ub=np.array(rows), b_ub=np.zeros(len(rows)), bounds=bounds)


def solve_exact(
    model: MilpModel,
    node_limit: int = DEFAULT_NODE_LIMIT,
    time_limit: float | None = None,
    enforce_size_guideline: bool = False,
) -> TuningSolution:
    """Provably optimal solution of the tuning MILP at desk scale.

    Exceeding ``node_limit`` or ``time_limit`` aborts with the best
    incumbent, flagged non-optimal in the stats.
    """
    if enforce_size_guideline and model.n_binary > GUIDELINE_BINARIES:
        raise SizeGuardError(
            f"{model.n_binary} binaries exceeds the desk-scale guideline of {GUIDELINE_BINARIES}"
        )
    start = time.perf_counter()
    instance = model.instance
    tasks = instance.tasks
    agents = instance.agents
    n_agents = len(agents)

    base_bounds = list(model.bounds)
    nodes = 0
    lp_iters = 0
    best_obj = float("inf")
    best_weights = None
    best_assignments: dict[str, str] | None = None
    hit_limit = False

    def consider(obj: float, weights, assignments: dict[str, str]) -> None:
        nonlocal best_obj, best_weights, best_assignments
        if obj < best_obj - 1e-12:
            best_obj, best_weights, best_assignments = obj, weights, assignments

    # Each stack entry: per-binary fixing (-1 free, 0, 1), stored compactly.
    root = np.full(model.n_binary, -1, dtype=np.int8)
    stack = [root]
    seeded = False

    while stack:
        if nodes >= node_limit or (
            time_limit is not None and time.perf_counter() - start > time_limit
        ):
            hit_limit = True
            break
        fixing = stack.pop()
        nodes += 1

        bounds = base_bounds.copy()
        infeasible_fix = False
        for ti in range(len(tasks)):
            row = fixing[ti * n_agents:(ti + 1) * n_agents]
            if (row == 0).all():
                infeasible_fix = True
                break
        if infeasible_fix:
            continue
        for idx in range(model.n_binary):
            if fixing[idx] == 0:
                bounds[idx] = (0.0, 0.0)
            elif fixing[idx] == 1:
                bounds[idx] = (1.0, 1.0)

        res = solve_lp(model.c, model.a_ub, model.b_ub, model.a_eq, model.b_eq, bounds)
        lp_iters += res.iterations
        if res.status == INFEASIBLE:
            continue
        if res.status == ITERATION_LIMIT:
            hit_limit = True
            break
        if res.status != OPTIMAL:
            raise RuntimeError(f"unexpected LP status {res.status} in branch and bound")

        if not seeded:
            # Root rounding heuristic: route every task with the relaxed
            # weights, then price that assignment exactly.
            seeded = True
            relaxed_weights = weights_from_vector(model, res.x)
            heuristic = {}
            for t in tasks:
                nets = [
                    (net(instance.rows[(t, a)], relaxed_weights).net, ai)
                    for ai, a in enumerate(agents)
                ]
                heuristic[t] = agents[min(nets)[1]]
            inner = _inner_lp(model, heuristic)
            lp_iters += inner.iterations
            if inner.status == OPTIMAL:
                w_names = ["w_c", "w_h"] + [f"w_j:{j}" for j in instance.judge_ids]
                from ..domain import ScoringWeights

                weights = ScoringWeights(
                    w_c=float(inner.x[0]),
                    w_h=float(inner.x[1]),
                    w_judge={j: float(inner.x[2 + k]) for k, j in enumerate(instance.judge_ids)},
                    ablation_mask=instance.ablation_mask,
                )
                consider(float(inner.fun), weights, dict(heuristic))

        if res.fun >= best_obj - PRUNE_TOL:
            continue

        xs = res.x[: model.n_binary]
        frac = np.abs(xs - np.round(xs))
        if frac.max() <= INT_TOL:
            assignments = {}
            for t in tasks:
                for a in agents:
                    if res.x[model.x_index[(t, a)]] > 0.5:
                        assignments[t] = a
                        break
            consider(res.fun, weights_from_vector(model, res.x), assignments)
            continue

        # Most-fractional branching; np.argmax returns the lowest index on ties,
        # which is lowest task index then lowest agent index by construction.
        branch_var = int(np.argmax(frac))
        ti = branch_var // n_agents

        child0 = fixing.copy()
        child0[branch_var] = 0
        child1 = fixing.copy()
        child1[branch_var] = 1
        # Selecting an agent deselects the task's others.
        for ai in range(n_agents):
            idx = ti * n_agents + ai
            if idx != branch_var and child1[idx] == -1:
                child1[idx] = 0
        stack.append(child0)
        stack.append(child1)  # popped first: dive on the one-branch

    wall = time.perf_counter() - start
    if best_assignments is None:
        raise RuntimeError("branch and bound terminated without an incumbent")

    return TuningSolution(
        weights=best_weights,
        assignments=best_assignments,
        objective=float(best_obj),
        stats=SolverStats(nodes=nodes, lp_iterations=lp_iters, wall_time=wall, optimal=not hit_limit),
    )
