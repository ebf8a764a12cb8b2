"""Scenario bundles: tasks + pool + weights + config for synthetic runs.

A scenario manifest points at sibling task/pool/weight files and pins the
embedder and seeds, so a simulation is reproducible from one path.  The
helpers here assemble synthetic runtimes, run auction sequences and
permutation studies, and produce the all-agents evaluation matrix.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .agents import AgentRuntime, SyntheticAgent, SyntheticAgentSpec, SyntheticWorld
from .analysis import binned_metrics, coalition_game, cumulative_selection
from .domain import AgentProfile, ScoringWeights, Task, bin_label
from .embedding import make_embedder
from .engine import Auctioneer, AuctionConfig, RunResult, permute_tasks
from .memory import MemoryBank
from .runio import FileFormatError, PoolFile, load_pool, load_tasks, load_weights
from .scoring import FeatureRow

DEFAULT_TRACE_LAW = {
    "<=0.1": 2000.0,
    "<=0.5": 6000.0,
    "<=2.5": 20000.0,
    "<=12.5": 60000.0,
    "<=60": 150000.0,
}


@dataclass
class Scenario:
    name: str
    tasks: list[Task]
    pool: PoolFile
    weights: ScoringWeights
    retrieval_k: int
    seed: int
    embedder_config: dict
    score_range: tuple[int, int]

    def make_embedder(self):
        cfg = dict(self.embedder_config)
        name = cfg.pop("name", "hash")
        return make_embedder(name, **cfg)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FileFormatError(f"cannot read scenario file {path}: {exc}")
    base = path.parent
    tasks = load_tasks(base / doc["tasks"])
    pool = load_pool(base / doc["pool"])
    weights = load_weights(base / doc["weights"])
    return Scenario(
        name=doc.get("name", path.stem),
        tasks=tasks,
        pool=pool,
        weights=weights,
        retrieval_k=int(doc.get("retrieval_k", 8)),
        seed=int(doc.get("seed", 0)),
        embedder_config=doc.get("embedder", {"name": "hash", "dim": 256, "seed": 0}),
        score_range=tuple(doc.get("score_range", (0, 5))),
    )


def build_synthetic_world(
    pool: PoolFile, score_range: tuple[int, int] = (0, 5)
) -> SyntheticWorld:
    specs = {
        agent_id: SyntheticAgentSpec.from_dict(cfg) for agent_id, cfg in pool.synthetic.items()
    }
    missing = [p.id for p in pool.profiles if p.id not in specs]
    if missing:
        raise FileFormatError(f"pool agents without synthetic laws: {missing}")
    law = pool.trace_token_law if pool.trace_token_law is not None else DEFAULT_TRACE_LAW
    return SyntheticWorld(
        specs=specs,
        bin_of_task=lambda task: bin_label(task.tau_minutes),
        trace_token_law=law,
        score_range=score_range,
        prices={p.id: p.price for p in pool.profiles},
    )


def build_synthetic_runtimes(
    pool: PoolFile, score_range: tuple[int, int] = (0, 5)
) -> dict[str, AgentRuntime]:
    world = build_synthetic_world(pool, score_range)
    return {
        p.id: SyntheticAgent(profile=p, spec=world.specs[p.id], world=world)
        for p in pool.profiles
    }


def auction_run(
    scenario: Scenario,
    run_label: object = 0,
    permute: bool = True,
    no_memory: bool = False,
    profiles: list[AgentProfile] | None = None,
) -> RunResult:
    """One full auction sequence over the scenario's tasks.

    ``profiles`` restricts participation to a coalition (all roles).
    """
    pool_profiles = profiles if profiles is not None else scenario.pool.profiles
    runtimes = build_synthetic_runtimes(scenario.pool, scenario.score_range)
    runtimes = {p.id: runtimes[p.id] for p in pool_profiles}
    config = AuctionConfig(
        weights=scenario.weights,
        retrieval_k=scenario.retrieval_k,
        refinement_enabled=not no_memory,
        random_seed=scenario.seed,
    )
    embedder = scenario.make_embedder()
    auctioneer = Auctioneer(pool_profiles, runtimes, config, embedder)
    tasks = (
        permute_tasks(scenario.tasks, scenario.seed, run_label) if permute else list(scenario.tasks)
    )
    bank = None if no_memory else MemoryBank(embedder_tag=embedder.tag, dim=embedder.dim)
    return auctioneer.run_sequence(tasks, bank)


def prices_of(profiles: list[AgentProfile]) -> dict[str, float]:
    return {p.id: p.price for p in profiles}


def run_summary(
    result: RunResult, scenario: Scenario, include_overhead: bool = True
) -> dict:
    tasks_by_id = {t.id: t for t in scenario.tasks}
    metrics = binned_metrics(
        result.records, tasks_by_id, prices_of(scenario.pool.profiles),
        include_overhead=include_overhead,
    )
    overhead = sum(r.overhead_tokens() for r in result.records)
    summary = {
        "n_tasks": len(result.records),
        "n_errors": len(result.errors),
        "overhead_tokens_total": overhead,
        "overhead_tokens_mean": overhead / len(result.records) if result.records else 0.0,
        "bins": {label: m.to_dict() for label, m in sorted(metrics.items())},
        "cumulative_selection": {
            p.id: cumulative_selection(result.records, p.id)
            for p in sorted(scenario.pool.profiles, key=lambda p: p.id)
        },
    }
    return summary


def _mean_std(values: list[float]) -> dict:
    n = len(values)
    mean = sum(values) / n
    if n > 1:
        var = sum((v - mean) ** 2 for v in values) / (n - 1)
    else:
        var = 0.0
    return {"mean": mean, "std": math.sqrt(var)}


def simulate(scenario: Scenario, runs: int = 5, no_memory: bool = False) -> dict:
    """Seeded permutation runs with mean/std aggregation per bin."""
    per_run = []
    for run_label in range(runs):
        result = auction_run(scenario, run_label=run_label, permute=True, no_memory=no_memory)
        per_run.append(run_summary(result, scenario))
    labels = sorted({label for s in per_run for label in s["bins"]})
    aggregated = {}
    for label in labels:
        rows = [s["bins"][label] for s in per_run if label in s["bins"]]
        aggregated[label] = {
            "n_runs": len(rows),
            "pass_at_1": _mean_std([r["pass_at_1"] for r in rows]),
            "dollars_per_mtok": _mean_std([r["dollars_per_mtok"] for r in rows]),
            "selection_shares": {
                agent: _mean_std([r["selection_shares"].get(agent, 0.0) for r in rows])
                for agent in sorted({a for r in rows for a in r["selection_shares"]})
            },
        }
    return {
        "runs": runs,
        "seed": scenario.seed,
        "bins": aggregated,
        "per_run": per_run,
    }


def evaluate_all(
    tasks: list[Task],
    pool: PoolFile,
    runtimes: dict[str, AgentRuntime],
    score_range: tuple[int, int] = (0, 5),
) -> tuple[list[dict], list[tuple[str, FeatureRow]]]:
    """Run every agent on every task: correctness matrix plus feature dump."""
    judges = [p for p in pool.profiles if "judge" in p.roles]
    matrix: list[dict] = []
    features: list[tuple[str, FeatureRow]] = []
    lo, hi = score_range
    for task in tasks:
        agents_out = {}
        for profile in pool.profiles:
            runtime = runtimes[profile.id]
            draft = runtime.propose(task, task.context)
            votes = {}
            for judge in judges:
                score, _ = runtimes[judge.id].judge(task, draft.text)
                votes[judge.id] = max(lo, min(hi, score))
            features.append(
                (
                    task.id,
                    FeatureRow(
                        agent_id=profile.id,
                        price=profile.price,
                        token_count=draft.token_count,
                        entropy=draft.entropy,
                        jury_scores=votes,
                    ),
                )
            )
            execution = runtime.execute(task, draft.text)
            agents_out[profile.id] = {
                "correct": bool(execution.correct),
                "trace_tokens": execution.trace_tokens,
                "spend": profile.price * execution.trace_tokens / 1e6,
            }
        matrix.append({"task_id": task.id, "agents": agents_out})
    return matrix, features


def coalition_value_game(
    scenario: Scenario,
    metric: str = "pass_at_1",
    spend_penalty: float = 0.0,
    no_memory: bool = False,
):
    """Coalition game over the pool: value of a subset is its restricted run.

    The removed agents leave every role: bidding, jury, and memory.  The
    default value is the pass@1 fraction; ``metric='utility'`` subtracts
    ``spend_penalty`` times the total spend.
    """
    profiles = {p.id: p for p in scenario.pool.profiles}

    def evaluate(coalition: tuple[str, ...]) -> float:
        subset = [profiles[a] for a in coalition]
        result = auction_run(scenario, run_label="shapley", permute=False,
                          no_memory=no_memory, profiles=subset)
        if not result.records:
            return 0.0
        correct = sum(1 for r in result.records if r.execution and r.execution.correct)
        pass1 = correct / len(result.records)
        if metric == "pass_at_1":
            return pass1
        if metric == "utility":
            spend = sum(r.execution.spend for r in result.records if r.execution)
            return pass1 - spend_penalty * spend
        raise FileFormatError(f"unknown coalition metric {metric!r}")

    return coalition_game(sorted(profiles), evaluate)
