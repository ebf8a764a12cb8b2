"""Min-max weight-tuning MILP.

Minimize the worst-case cost-minus-value Q over tasks, choosing one agent
per task (binary x) and the scoring weights jointly.  Big-M rows pin each
task's z to the selected agent's net.  The literal program is positively
homogeneous in the weights, so the weights are confined to a box
[-weight_bound, weight_bound]; routing is invariant to that scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..domain import DomainError, ScoringWeights
from ..scoring import FeatureRow, net_coefficients, unit_weight_bound

DEFAULT_BIG_M = 1e4
BIG_M_COVERAGE = 100.0
DEFAULT_WEIGHT_BOUND = 1.0


class BigMValidationError(DomainError):
    """big_m fails the required coverage of the feature range."""


class SizeGuardError(DomainError):
    """Instance exceeds the configured enumeration/solve limits."""


@dataclass(frozen=True)
class TuningInstance:
    tasks: list[str]
    agents: list[str]
    rows: dict[tuple[str, str], FeatureRow]
    big_m: float = DEFAULT_BIG_M
    weight_bound: float = DEFAULT_WEIGHT_BOUND
    ablation_mask: frozenset[str] = frozenset()
    judges: list[str] | None = None

    def __post_init__(self):
        if not self.tasks or not self.agents:
            raise DomainError("tuning instance needs at least one task and one agent")
        for t in self.tasks:
            for a in self.agents:
                if (t, a) not in self.rows:
                    raise DomainError(f"missing feature row for task {t}, agent {a}")
        validate_big_m(self)

    @property
    def judge_ids(self) -> list[str]:
        return sorted(self.agents) if self.judges is None else list(self.judges)


def validate_big_m(instance: TuningInstance) -> float:
    """Check big_m covers the unit-weight net range with 100x headroom."""
    judges = sorted(instance.agents) if instance.judges is None else list(instance.judges)
    worst = 0.0
    worst_key = None
    for key, row in instance.rows.items():
        bound = unit_weight_bound(row, judges, instance.ablation_mask)
        if bound > worst:
            worst, worst_key = bound, key
    required = BIG_M_COVERAGE * worst
    if instance.big_m < required:
        raise BigMValidationError(
            f"big_m={instance.big_m:g} is below the required {required:g} "
            f"(100x the unit-weight |cost-value| bound {worst:g} "
            f"attained at task/agent {worst_key})"
        )
    return worst


@dataclass
class MilpModel:
    """LP-relaxation matrices plus the integrality markers."""

    instance: TuningInstance
    c: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    bounds: list[tuple[float | None, float | None]]
    binary_indices: list[int]
    x_index: dict[tuple[str, str], int]
    z_index: dict[str, int]
    q_index: int
    w_index: dict[str, int]  # "w_c", "w_h", then judge ids

    @property
    def n_binary(self) -> int:
        return len(self.binary_indices)

    @property
    def n_continuous(self) -> int:
        return len(self.c) - self.n_binary

    @property
    def n_functional_constraints(self) -> int:
        return self.a_ub.shape[0] + self.a_eq.shape[0]

    def weight_slots(self) -> list[str]:
        return list(self.w_index)


def build_milp(instance: TuningInstance) -> MilpModel:
    """Assemble the min-max program's matrices for the instance."""
    tasks, agents = instance.tasks, instance.agents
    judges = instance.judge_ids
    big_m = instance.big_m
    n_x = len(tasks) * len(agents)
    n_z = len(tasks)
    w_names = ["w_c", "w_h"] + [f"w_j:{j}" for j in judges]

    x_index = {}
    for ti, t in enumerate(tasks):
        for ai, a in enumerate(agents):
            x_index[(t, a)] = ti * len(agents) + ai
    z_index = {t: n_x + ti for ti, t in enumerate(tasks)}
    q_index = n_x + n_z
    w_index = {name: q_index + 1 + k for k, name in enumerate(w_names)}
    n_vars = q_index + 1 + len(w_names)

    rows_ub: list[np.ndarray] = []
    rhs_ub: list[float] = []
    for t in tasks:
        for a in agents:
            coef_c, coef_h, coef_j = net_coefficients(
                instance.rows[(t, a)], judges, instance.ablation_mask
            )
            net_vec = np.zeros(n_vars)
            net_vec[w_index["w_c"]] = coef_c
            net_vec[w_index["w_h"]] = coef_h
            for j, cj in zip(judges, coef_j):
                net_vec[w_index[f"w_j:{j}"]] = cj

            # z_t >= net - M(1 - x)  <=>  net - z_t + M x <= M
            row = net_vec.copy()
            row[z_index[t]] = -1.0
            row[x_index[(t, a)]] += big_m
            rows_ub.append(row)
            rhs_ub.append(big_m)

            # z_t <= net + M(1 - x)  <=>  -net + z_t + M x <= M
            row = -net_vec
            row[z_index[t]] = 1.0
            row[x_index[(t, a)]] += big_m
            rows_ub.append(row)
            rhs_ub.append(big_m)

    for t in tasks:
        row = np.zeros(n_vars)
        row[z_index[t]] = 1.0
        row[q_index] = -1.0
        rows_ub.append(row)
        rhs_ub.append(0.0)

    rows_eq: list[np.ndarray] = []
    rhs_eq: list[float] = []
    for t in tasks:
        row = np.zeros(n_vars)
        for a in agents:
            row[x_index[(t, a)]] = 1.0
        rows_eq.append(row)
        rhs_eq.append(1.0)

    c = np.zeros(n_vars)
    c[q_index] = 1.0

    bounds: list[tuple[float | None, float | None]] = []
    for _ in range(n_x):
        bounds.append((0.0, 1.0))
    for _ in range(n_z):
        bounds.append((None, None))
    bounds.append((None, None))  # Q
    wb = instance.weight_bound
    for _ in w_names:
        bounds.append((-wb, wb))

    return MilpModel(
        instance=instance,
        c=c,
        a_ub=np.array(rows_ub),
        b_ub=np.array(rhs_ub),
        a_eq=np.array(rows_eq),
        b_eq=np.array(rhs_eq),
        bounds=bounds,
        binary_indices=list(range(n_x)),
        x_index=x_index,
        z_index=z_index,
        q_index=q_index,
        w_index=w_index,
    )


@dataclass(frozen=True)
class SolverStats:
    nodes: int
    lp_iterations: int
    wall_time: float
    optimal: bool


@dataclass(frozen=True)
class TuningSolution:
    weights: ScoringWeights
    assignments: dict[str, str]
    objective: float
    stats: SolverStats = field(compare=False, default=SolverStats(0, 0, 0.0, True))

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.to_dict(),
            "assignments": {k: self.assignments[k] for k in sorted(self.assignments)},
            "objective": self.objective,
            "stats": {
                "nodes": self.stats.nodes,
                "lp_iterations": self.stats.lp_iterations,
                "wall_time": self.stats.wall_time,
                "optimal": self.stats.optimal,
            },
        }


def weights_from_vector(model: MilpModel, x: np.ndarray, tuned_on: str | None = None) -> ScoringWeights:
    wi = model.w_index
    judges = model.instance.judge_ids
    return ScoringWeights(
        w_c=float(x[wi["w_c"]]),
        w_h=float(x[wi["w_h"]]),
        w_judge={j: float(x[wi[f"w_j:{j}"]]) for j in judges},
        ablation_mask=model.instance.ablation_mask,
        tuned_on=tuned_on,
    )
