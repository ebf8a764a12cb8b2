"""Post-run analytics.

Binned pass@1 and effective price, exact Shapley attribution over agent
coalitions, hindsight oracle routing with its four-way diagnosis, running
selection shares, and the two significance procedures used in reports.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import betainc

from .domain import AgentProfile, AuctionRecord, DomainError, Task, bin_label, default_bins

# --------------------------------------------------------------------------
# Binned run metrics
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BinMetrics:
    label: str
    n_tasks: int
    pass_at_1: float  # percent
    dollars_per_mtok: float
    mean_trace_tokens: float
    selection_shares: dict[str, float]  # percent of the bin's tasks per agent

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "n_tasks": self.n_tasks,
            "pass_at_1": self.pass_at_1,
            "dollars_per_mtok": self.dollars_per_mtok,
            "mean_trace_tokens": self.mean_trace_tokens,
            "selection_shares": {k: self.selection_shares[k] for k in sorted(self.selection_shares)},
        }


ALL_BIN = "all"


def bin_report_order(labels, bins=None) -> list[str]:
    """Schedule order, then the overall row, then the unbinned bucket."""
    schedule = [b.label for b in (bins if bins is not None else default_bins())]
    ordered = [label for label in schedule if label in labels]
    for tail in (ALL_BIN, "unbinned"):
        if tail in labels:
            ordered.append(tail)
    for label in labels:
        if label not in ordered:
            ordered.append(label)
    return ordered


def binned_metrics(
    records: list[AuctionRecord],
    tasks_by_id: dict[str, Task],
    prices: dict[str, float],
    bins=None,
    include_overhead: bool = True,
) -> dict[str, BinMetrics]:
    """Per-bin pass@1, $/Mt, mean trace tokens and selection shares.

    Spend counts the winner's trace plus, when ``include_overhead`` is on,
    every bid's overhead tokens at its bidder's price.  Empty bins are
    absent from the result.  Tasks without a solution-time annotation land
    in the unbinned bucket and are excluded from the binned rows but kept
    in the overall row.
    """
    schedule = bins if bins is not None else default_bins()
    grouped: dict[str, list[AuctionRecord]] = {}
    for record in records:
        task = tasks_by_id[record.task_id]
        label = bin_label(task.tau_minutes, schedule)
        grouped.setdefault(label, []).append(record)
    grouped[ALL_BIN] = list(records)

    out: dict[str, BinMetrics] = {}
    for label, recs in grouped.items():
        if not recs:
            continue
        n = len(recs)
        correct = sum(1 for r in recs if r.execution and r.execution.correct)
        spend = 0.0
        tokens = 0
        trace_tokens = []
        for r in recs:
            if r.execution:
                spend += prices[r.final_winner] * r.execution.trace_tokens / 1e6
                tokens += r.execution.trace_tokens
                trace_tokens.append(r.execution.trace_tokens)
            if include_overhead:
                for b in r.all_bids():
                    spend += prices[b.agent_id] * b.overhead_tokens / 1e6
                    tokens += b.overhead_tokens
        shares: dict[str, float] = {}
        for r in recs:
            shares[r.final_winner] = shares.get(r.final_winner, 0.0) + 1.0
        shares = {a: 100.0 * c / n for a, c in shares.items()}
        out[label] = BinMetrics(
            label=label,
            n_tasks=n,
            pass_at_1=100.0 * correct / n,
            dollars_per_mtok=(spend / tokens * 1e6) if tokens else 0.0,
            mean_trace_tokens=(sum(trace_tokens) / len(trace_tokens)) if trace_tokens else 0.0,
            selection_shares=shares,
        )
    return out


def cumulative_selection(records: list[AuctionRecord], agent_id: str) -> list[float]:
    """Running fraction of tasks routed to the agent, in sequence order."""
    ordered = sorted(records, key=lambda r: r.sequence_index)
    series = []
    hits = 0
    for n, record in enumerate(ordered, start=1):
        if record.final_winner == agent_id:
            hits += 1
        series.append(hits / n)
    return series


# --------------------------------------------------------------------------
# Shapley attribution
# --------------------------------------------------------------------------

SHAPLEY_MAX_PLAYERS = 10


@dataclass
class CoalitionGame:
    """Players and a deterministic value over each subset of them."""

    players: list[str]
    value_fn: dict[frozenset[str], float]

    def value(self, coalition: frozenset[str]) -> float:
        return self.value_fn.get(coalition, 0.0)


def shapley(game: CoalitionGame) -> dict[str, float]:
    """Exact Shapley values by subset enumeration with factorial weights."""
    players = list(game.players)
    n = len(players)
    if n > SHAPLEY_MAX_PLAYERS:
        raise DomainError(f"{n} players exceeds the exact-enumeration limit of {SHAPLEY_MAX_PLAYERS}")
    values = {p: 0.0 for p in players}
    fact = math.factorial
    for player in players:
        others = [p for p in players if p != player]
        for size in range(len(others) + 1):
            weight = fact(size) * fact(n - size - 1) / fact(n)
            for combo in itertools.combinations(others, size):
                coalition = frozenset(combo)
                marginal = game.value(coalition | {player}) - game.value(coalition)
                values[player] += weight * marginal
    return values


def normalized_shares(values: dict[str, float]) -> tuple[dict[str, float], bool]:
    """Percentage shares summing to 100.

    With negative raw values present, shares are the positive parts over
    their sum (negative contributors get a zero share) and the flag in the
    result is set; raw values stay available alongside.
    """
    has_negative = any(v < 0 for v in values.values())
    parts = {k: max(v, 0.0) for k, v in values.items()} if has_negative else dict(values)
    denom = sum(parts.values())
    if denom == 0:
        n = len(values)
        return {k: 100.0 / n for k in values}, has_negative
    return {k: 100.0 * v / denom for k, v in parts.items()}, has_negative


def coalition_game(players: list[str], evaluate, empty_value: float = 0.0) -> CoalitionGame:
    """Materialize a game by evaluating every coalition once.

    ``evaluate`` maps a sorted player tuple to a real; the empty coalition
    takes ``empty_value`` without a call.
    """
    value_fn: dict[frozenset[str], float] = {frozenset(): empty_value}
    for size in range(1, len(players) + 1):
        for combo in itertools.combinations(sorted(players), size):
            value_fn[frozenset(combo)] = float(evaluate(combo))
    return CoalitionGame(players=sorted(players), value_fn=value_fn)


# --------------------------------------------------------------------------
# Oracle routing and diagnostics
# --------------------------------------------------------------------------


class Diagnosis(str, Enum):
    CORRECT = "correct"
    OVER_ESCALATION = "over_escalation"
    UNDER_ESCALATION = "under_escalation"
    UNAVOIDABLE = "unavoidable"


@dataclass(frozen=True)
class RoutingDiagnosis:
    task_id: str
    category: Diagnosis
    chosen: str
    oracle_choice: str | None


def oracle_route(
    correctness: dict[str, dict[str, bool]],
    pool: list[AgentProfile],
) -> dict[str, str]:
    """Cheapest correct agent per task; cheapest overall when none is correct.

    ``correctness[task][agent]`` must be complete over the pool.
    """
    by_price = sorted(pool, key=lambda p: (p.price_per_mtok, p.id))
    routes: dict[str, str] = {}
    for task_id in correctness:
        row = correctness[task_id]
        missing = [p.id for p in pool if p.id not in row]
        if missing:
            raise DomainError(f"correctness matrix for task {task_id} missing agents {missing}")
        chosen = next((p.id for p in by_price if row[p.id]), by_price[0].id)
        routes[task_id] = chosen
    return routes


def diagnose(
    chosen: dict[str, str],
    oracle: dict[str, str],
    correctness: dict[str, dict[str, bool]],
    pool: list[AgentProfile],
) -> list[RoutingDiagnosis]:
    """Four-way routing diagnosis per task.

    Precedence makes the categories a partition: unavoidable when nobody
    is correct; correct when the router's pick is a cheapest-correct
    agent; over-escalation when it paid more than the oracle; otherwise
    under-escalation (it went cheaper and failed where pricier succeeds).
    """
    price = {p.id: p.price_per_mtok for p in pool}
    out: list[RoutingDiagnosis] = []
    for task_id in chosen:
        pick = chosen[task_id]
        oracle_pick = oracle[task_id]
        row = correctness[task_id]
        if not any(row.values()):
            category = Diagnosis.UNAVOIDABLE
            oracle_ref = None
        elif row.get(pick, False) and price[pick] <= price[oracle_pick]:
            category = Diagnosis.CORRECT
            oracle_ref = oracle_pick
        elif price[pick] > price[oracle_pick]:
            category = Diagnosis.OVER_ESCALATION
            oracle_ref = oracle_pick
        else:
            category = Diagnosis.UNDER_ESCALATION
            oracle_ref = oracle_pick
        out.append(RoutingDiagnosis(task_id, category, pick, oracle_ref))
    return out


def confusion_matrix(
    diagnoses: list[RoutingDiagnosis],
    chosen: dict[str, str],
    oracle: dict[str, str],
    pool: list[AgentProfile],
) -> dict[str, dict[str, float]]:
    """Row-normalized chosen-vs-oracle percentages; the none column collects
    tasks where no agent succeeds."""
    agents = [p.id for p in sorted(pool, key=lambda p: (p.price_per_mtok, p.id))]
    counts: dict[str, dict[str, int]] = {a: {b: 0 for b in agents + ["none"]} for a in agents}
    for d in diagnoses:
        col = d.oracle_choice if d.category != Diagnosis.UNAVOIDABLE else "none"
        counts[d.chosen][col or "none"] += 1
    matrix: dict[str, dict[str, float]] = {}
    for a in agents:
        total = sum(counts[a].values())
        if total == 0:
            continue
        matrix[a] = {b: 100.0 * c / total for b, c in counts[a].items()}
    return matrix


# --------------------------------------------------------------------------
# Statistics
# --------------------------------------------------------------------------

UNDEFINED = None


def one_sample_t(samples: list[float], reference: float) -> tuple[float, float] | None:
    """Two-tailed one-sample t-test; None marks the zero-variance case."""
    n = len(samples)
    if n < 2:
        raise DomainError("one_sample_t needs at least two samples")
    if all(x == samples[0] for x in samples):
        return UNDEFINED
    mean = sum(samples) / n
    var = sum((x - mean) ** 2 for x in samples) / (n - 1)
    if var == 0.0:
        return UNDEFINED
    t = (mean - reference) / math.sqrt(var / n)
    df = n - 1
    # Two-tailed p via the regularized incomplete beta.
    p = float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return t, p


def bootstrap_ci(
    samples: list[float],
    reference: float,
    resamples: int = 10_000,
    level: float = 0.95,
    seed: int = 0,
) -> tuple[float, float]:
    """Seeded percentile interval for mean(samples) - reference."""
    if not samples:
        raise DomainError("bootstrap_ci needs at least one sample")
    data = np.asarray(samples, dtype=float)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, data.size, size=(resamples, data.size))
    diffs = data[idx].mean(axis=1) - reference
    alpha = (1.0 - level) / 2.0
    lo, hi = np.percentile(diffs, [100 * alpha, 100 * (1 - alpha)])
    return float(lo), float(hi)
