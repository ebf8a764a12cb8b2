"""Regenerate the shipped synthetic scenario and its frozen expectations.

Builds the 4-agent ladder pool, the 500-task / 5-bin task set, the dev
split, the routing weights, the all-agents evaluation matrix, and
expected.json holding the values the acceptance suite asserts against.
Everything is seeded; rerunning reproduces the files byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from strategy_auction.domain import Task, TaskDomain, dumps  # noqa: E402
from strategy_auction.runio import (  # noqa: E402
    load_pool,
    save_features,
    save_matrix,
    save_tasks,
    write_json,
)
from strategy_auction.scenario import (  # noqa: E402
    build_synthetic_runtimes,
    evaluate_all,
    load_scenario,
    simulate,
)
from strategy_auction.seeding import rng_for  # noqa: E402

SCENARIO_SEED = 20260810

BIN_SPECS = [
    # label, tau low (exclusive), tau high, topic words
    ("<=0.1", 0.02, 0.1, "lookup fact quick reference"),
    ("<=0.5", 0.12, 0.5, "short search compare sources"),
    ("<=2.5", 0.6, 2.5, "multi step retrieval cross check"),
    ("<=12.5", 3.0, 12.5, "long investigation synthesis report"),
    ("<=60", 13.0, 59.0, "extended research deep analysis dossier"),
]

AGENTS = [
    {
        "id": "a4b",
        "params": 4,
        "synthetic": {
            "skill_curve": {"<=0.1": 0.90, "<=0.5": 0.82, "<=2.5": 0.55, "<=12.5": 0.25, "<=60": 0.10},
            "strategy_length_law": [105.0, 18.0],
            "entropy_law": [0.55, 0.06],
            "seed": 401,
            "judge_noise": 0.14,
            "refine_gain": 0.16,
            "quality_offset": -0.08,
        },
    },
    {
        "id": "a8b",
        "params": 8,
        "synthetic": {
            "skill_curve": {"<=0.1": 0.93, "<=0.5": 0.86, "<=2.5": 0.68, "<=12.5": 0.42, "<=60": 0.20},
            "strategy_length_law": [108.0, 18.0],
            "entropy_law": [0.55, 0.06],
            "seed": 802,
            "judge_noise": 0.11,
            "refine_gain": 0.12,
            "quality_offset": -0.05,
        },
    },
    {
        "id": "a14b",
        "params": 14,
        "synthetic": {
            "skill_curve": {"<=0.1": 0.95, "<=0.5": 0.90, "<=2.5": 0.80, "<=12.5": 0.62, "<=60": 0.38},
            "strategy_length_law": [112.0, 18.0],
            "entropy_law": [0.56, 0.06],
            "seed": 1403,
            "judge_noise": 0.08,
            "refine_gain": 0.08,
            "quality_offset": -0.02,
        },
    },
    {
        "id": "a32b",
        "params": 32,
        "synthetic": {
            "skill_curve": {"<=0.1": 0.97, "<=0.5": 0.94, "<=2.5": 0.88, "<=12.5": 0.76, "<=60": 0.56},
            "strategy_length_law": [115.0, 18.0],
            "entropy_law": [0.57, 0.06],
            "seed": 3204,
            "judge_noise": 0.05,
            "refine_gain": 0.05,
            "quality_offset": 0.0,
        },
    },
]

TRACE_LAW = {
    "<=0.1": 2000.0,
    "<=0.5": 6000.0,
    "<=2.5": 20000.0,
    "<=12.5": 60000.0,
    "<=60": 150000.0,
}

WEIGHTS = {
    "w_c": 0.004,
    "w_h": 0.5,
    "w_judge": {"a4b": 0.08, "a8b": 0.08, "a14b": 0.08, "a32b": 0.08},
    "score_range": [0, 5],
    "ablation_mask": [],
    "tuned_on": "ladder-dev",
}

ENTITIES = [
    "harbor", "glacier", "archive", "orchard", "reactor", "satellite", "museum",
    "aquifer", "foundry", "observatory", "terminal", "basilica", "canal", "quarry",
    "monastery", "estuary", "viaduct", "planetarium", "lighthouse", "citadel",
]


def make_tasks(count_per_bin: int, prefix: str, seed_label: str) -> list[Task]:
    tasks = []
    rng = rng_for(SCENARIO_SEED, seed_label)
    index = 0
    for label, lo, hi, topic in BIN_SPECS:
        for _ in range(count_per_bin):
            tau = round(rng.uniform(lo, hi), 3)
            entity = ENTITIES[index % len(ENTITIES)]
            other = ENTITIES[(index * 7 + 3) % len(ENTITIES)]
            prompt = (
                f"{topic} question {index}: determine how the {entity} relates "
                f"to the {other} and report the figure."
            )
            tasks.append(
                Task(
                    id=f"{prefix}{index:04d}",
                    domain=TaskDomain.DEEP_SEARCH,
                    prompt=prompt,
                    tau_minutes=tau,
                )
            )
            index += 1
    return tasks


def write_pool(path: Path) -> None:
    doc = {
        "anchor": {
            "anchor_params": 32,
            "input_price": "0.30",
            "output_price": "0.59",
            "io_ratio": [4, 1],
        },
        "agents": AGENTS,
        "trace_token_law": TRACE_LAW,
    }
    path.write_text(json.dumps(doc, indent=2) + "\n")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "scenarios" / "ladder"))
    parser.add_argument("--tasks-per-bin", type=int, default=100)
    parser.add_argument("--runs", type=int, default=5)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    tasks = make_tasks(args.tasks_per_bin, "t", "test-tasks")
    save_tasks(out / "tasks.jsonl", tasks)
    dev_tasks = make_tasks(1, "d", "dev-tasks")
    save_tasks(out / "dev_tasks.jsonl", dev_tasks)
    write_pool(out / "pool.json")
    (out / "weights.json").write_text(json.dumps(WEIGHTS, indent=2, sort_keys=True) + "\n")
    manifest = {
        "name": "ladder",
        "tasks": "tasks.jsonl",
        "pool": "pool.json",
        "weights": "weights.json",
        "retrieval_k": 8,
        "seed": SCENARIO_SEED,
        "embedder": {"name": "hash", "dim": 256, "seed": 7},
        "score_range": [0, 5],
    }
    (out / "scenario.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    scenario = load_scenario(out / "scenario.json")

    # All-agents evaluation: correctness/token matrix + tuning features.
    runtimes = build_synthetic_runtimes(scenario.pool)
    matrix, features = evaluate_all(tasks, scenario.pool, runtimes)
    save_matrix(out / "matrix.jsonl", matrix)
    save_features(out / "features.jsonl", features)
    dev_matrix, dev_features = evaluate_all(dev_tasks, scenario.pool, runtimes)
    save_matrix(out / "dev_matrix.jsonl", dev_matrix)
    save_features(out / "dev_features.jsonl", dev_features)

    # Single-agent references from the matrix.
    per_agent = {}
    prices = {p.id: p.price for p in scenario.pool.profiles}
    for agent in prices:
        n = len(matrix)
        correct = sum(1 for row in matrix if row["agents"][agent]["correct"])
        per_agent[agent] = 100.0 * correct / n
    best_single = max(per_agent.values())
    largest = max(scenario.pool.profiles, key=lambda p: p.price_per_mtok)

    summary = simulate(scenario, runs=args.runs)
    overall = summary["bins"]["all"]
    router_pass = overall["pass_at_1"]["mean"]
    router_mtok = overall["dollars_per_mtok"]["mean"]

    series_checks = []
    for run in summary["per_run"]:
        series = run["cumulative_selection"]["a4b"]
        series_checks.append({"at_20": series[19], "final": series[-1]})
    mean_at_20 = sum(s["at_20"] for s in series_checks) / len(series_checks)
    mean_final = sum(s["final"] for s in series_checks) / len(series_checks)

    expected = {
        "scenario_seed": SCENARIO_SEED,
        "runs": args.runs,
        "per_agent_pass_at_1": per_agent,
        "best_single_pass_at_1": best_single,
        "largest_agent": largest.id,
        "largest_agent_mtok": float(largest.price_per_mtok),
        "router_pass_at_1_mean": router_pass,
        "router_dollars_per_mtok_mean": router_mtok,
        "smallest_cumulative_at_20_mean": mean_at_20,
        "smallest_cumulative_final_mean": mean_final,
        "bins": {
            label: {
                "pass_at_1_mean": stats["pass_at_1"]["mean"],
                "dollars_per_mtok_mean": stats["dollars_per_mtok"]["mean"],
            }
            for label, stats in summary["bins"].items()
        },
    }
    write_json(out / "expected.json", expected)

    print(f"best single agent pass@1: {best_single:.1f} ({per_agent})")
    print(f"router pass@1 mean: {router_pass:.2f} (target >= {best_single - 1.0:.2f})")
    print(f"router $/Mt mean: {router_mtok:.4f} (target <= {0.85 * float(largest.price_per_mtok):.4f})")
    print(f"4b cumulative: at20 {mean_at_20:.4f} -> final {mean_final:.4f}")
    ok = (
        router_pass >= best_single - 1.0
        and router_mtok <= 0.85 * float(largest.price_per_mtok)
        and mean_final > mean_at_20
    )
    print("criteria:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
