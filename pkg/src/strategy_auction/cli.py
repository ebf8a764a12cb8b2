"""Command-line surface for the auction pipeline.

Subcommands: tune-weights, run-auction, simulate, evaluate-all, analyze,
shapley, oracle, wtp.  Every command writes its outputs under a run
directory with a manifest naming the inputs and seeds; inputs are never
mutated.  Exit codes: 0 success, 2 malformed files, 3 pool/weights or
embedder mismatches, 4 solver guards, 5 gateway/auction failures,
1 anything else.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import __version__, backends
from .analysis import (
    bin_report_order,
    binned_metrics,
    confusion_matrix,
    cumulative_selection,
    diagnose,
    normalized_shares,
    oracle_route,
    shapley,
)
from .domain import DomainError, ScoringWeights
from .engine import AuctionConfig, Auctioneer, WeightPoolMismatchError, permute_tasks
from .memory import MemoryBank, MixedEmbedderError
from .runio import (
    FileFormatError,
    correctness_from_matrix,
    load_features,
    load_matrix,
    load_pool,
    load_tasks,
    load_transcript,
    load_weights,
    save_features,
    save_matrix,
    save_transcript,
    save_weights,
    write_json,
)
from .scenario import (
    build_synthetic_runtimes,
    coalition_value_game,
    evaluate_all,
    load_scenario,
    prices_of,
    auction_run,
    simulate,
)
from .tuning import (
    BigMValidationError,
    SizeGuardError,
    TuningInstance,
    build_milp,
    solve_exact,
)

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_FORMAT = 2
EXIT_MISMATCH = 3
EXIT_SOLVER_GUARD = 4
EXIT_GATEWAY = 5


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _manifest(out: Path, command: str, inputs: dict, seed: int | None = None) -> None:
    write_json(
        out / "manifest.json",
        {
            "command": command,
            "inputs": {k: str(v) for k, v in inputs.items() if v is not None},
            "seed": seed,
            "version": __version__,
            "kernel_backend": backends.BACKEND_NAME,
        },
    )


def _runtimes_for(pool, domain_tag: str):
    if pool.synthetic:
        return build_synthetic_runtimes(pool)
    from .agents import RemoteAgent, RemoteEndpoint

    runtimes = {}
    for profile in pool.profiles:
        if not profile.endpoint:
            raise FileFormatError(
                f"agent {profile.id} has neither synthetic laws nor an endpoint"
            )
        runtimes[profile.id] = RemoteAgent(
            profile, RemoteEndpoint(url=profile.endpoint, model=profile.id), domain_tag
        )
    return runtimes


def cmd_tune_weights(args) -> int:
    tasks = load_tasks(args.tasks)
    pool = load_pool(args.pool)
    rows = load_features(args.features)
    agents = [p.id for p in pool.profiles if "bidder" in p.roles]
    judges = sorted(p.id for p in pool.profiles if "judge" in p.roles)
    instance = TuningInstance(
        tasks=[t.id for t in tasks],
        agents=agents,
        rows=rows,
        big_m=args.big_m,
        weight_bound=args.weight_bound,
        ablation_mask=frozenset(args.ablate or ()),
        judges=judges,
    )
    solution = solve_exact(build_milp(instance))
    out = _out_dir(args)
    weights = ScoringWeights(
        w_c=solution.weights.w_c,
        w_h=solution.weights.w_h,
        w_judge=solution.weights.w_judge,
        ablation_mask=solution.weights.ablation_mask,
        tuned_on=args.domain,
    )
    save_weights(out / f"weights-{args.domain}.json", weights)
    write_json(out / "solver_report.json", solution.to_dict())
    _manifest(out, "tune-weights", {"tasks": args.tasks, "features": args.features, "pool": args.pool})
    print(f"objective {solution.objective:.6f} after {solution.stats.nodes} nodes")
    return EXIT_OK


def _write_run_outputs(out: Path, result, scenario_like_tasks, prices, include_overhead=True):
    save_transcript(out / "transcript.jsonl", result.records)
    tasks_by_id = {t.id: t for t in scenario_like_tasks}
    metrics = binned_metrics(result.records, tasks_by_id, prices, include_overhead=include_overhead)
    spend = sum(r.execution.spend for r in result.records if r.execution)
    overhead_tokens = sum(r.overhead_tokens() for r in result.records)
    overhead_spend = sum(
        prices[b.agent_id] * b.overhead_tokens / 1e6
        for r in result.records
        for b in r.all_bids()
    )
    summary = {
        "n_tasks": len(result.records),
        "n_errors": len(result.errors),
        "errors": [e.to_dict() for e in result.errors],
        "warnings": [w.to_dict() for w in result.warnings],
        "spend": spend + (overhead_spend if include_overhead else 0.0),
        "execution_spend": spend,
        "overhead_tokens_total": overhead_tokens,
        "overhead_tokens_mean": overhead_tokens / len(result.records) if result.records else 0.0,
        "bins": {label: m.to_dict() for label, m in sorted(metrics.items())},
    }
    write_json(out / "summary.json", summary)


def cmd_run_auction(args) -> int:
    tasks = load_tasks(args.tasks)
    pool = load_pool(args.pool)
    weights = load_weights(args.weights)
    runtimes = _runtimes_for(pool, args.domain)
    config = AuctionConfig(
        weights=weights,
        retrieval_k=args.retrieval_k,
        refinement_enabled=not args.no_memory,
        random_seed=args.seed,
    )
    from .embedding import make_embedder

    embedder = make_embedder("hash", dim=args.embedding_dim, seed=args.embedding_seed)
    auctioneer = Auctioneer(pool.profiles, runtimes, config, embedder)
    ordered = permute_tasks(tasks, args.seed) if args.permute else tasks
    bank = None if args.no_memory else MemoryBank(embedder_tag=embedder.tag, dim=embedder.dim)
    result = auctioneer.run_sequence(ordered, bank)
    out = _out_dir(args)
    _write_run_outputs(out, result, tasks, prices_of(pool.profiles))
    if bank is not None:
        bank.save(out / "memory.jsonl", out / "embeddings.jsonl")
    _manifest(
        out,
        "run-auction",
        {"tasks": args.tasks, "pool": args.pool, "weights": args.weights},
        seed=args.seed,
    )
    print(f"{len(result.records)} tasks auctioned, {len(result.errors)} errors")
    return EXIT_OK


def cmd_simulate(args) -> int:
    scn = load_scenario(args.scenario)
    summary = simulate(scn, runs=args.runs, no_memory=args.no_memory)
    out = _out_dir(args)
    write_json(out / "summary.json", summary)
    for run_label in range(args.runs):
        result = auction_run(scn, run_label=run_label, permute=True, no_memory=args.no_memory)
        save_transcript(out / f"transcript-run{run_label}.jsonl", result.records)
    _manifest(out, "simulate", {"scenario": args.scenario}, seed=scn.seed)
    overall = summary["bins"].get("all")
    if overall:
        print(
            f"{args.runs} runs: pass@1 {overall['pass_at_1']['mean']:.1f}"
            f" (std {overall['pass_at_1']['std']:.1f}),"
            f" $/Mt {overall['dollars_per_mtok']['mean']:.3f}"
        )
    return EXIT_OK


def cmd_evaluate_all(args) -> int:
    tasks = load_tasks(args.tasks)
    pool = load_pool(args.pool)
    runtimes = _runtimes_for(pool, args.domain)
    matrix, features = evaluate_all(tasks, pool, runtimes)
    out = _out_dir(args)
    save_matrix(out / "matrix.jsonl", matrix)
    save_features(out / "features.jsonl", features)
    _manifest(out, "evaluate-all", {"tasks": args.tasks, "pool": args.pool})
    print(f"evaluated {len(pool.profiles)} agents on {len(tasks)} tasks")
    return EXIT_OK


def cmd_analyze(args) -> int:
    records = load_transcript(args.transcript)
    tasks = load_tasks(args.tasks)
    pool = load_pool(args.pool)
    tasks_by_id = {t.id: t for t in tasks}
    prices = prices_of(pool.profiles)
    metrics = binned_metrics(
        records, tasks_by_id, prices, include_overhead=not args.no_overhead
    )
    curves = {
        p.id: cumulative_selection(records, p.id)
        for p in sorted(pool.profiles, key=lambda p: p.id)
    }
    out = _out_dir(args)
    write_json(
        out / "report.json",
        {
            "bins": {label: m.to_dict() for label, m in sorted(metrics.items())},
            "cumulative_selection": curves,
        },
    )
    agent_ids = sorted(prices)
    with (out / "report.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["bin", "n_tasks", "pass_at_1", "dollars_per_mtok", "mean_trace_tokens"]
            + [f"share_{a}" for a in agent_ids]
        )
        for label in bin_report_order(set(metrics)):
            m = metrics[label]
            writer.writerow(
                [label, m.n_tasks, f"{m.pass_at_1:.1f}", f"{m.dollars_per_mtok:.4f}",
                 f"{m.mean_trace_tokens:.0f}"]
                + [f"{m.selection_shares.get(a, 0.0):.1f}" for a in agent_ids]
            )
    _manifest(out, "analyze", {"transcript": args.transcript, "tasks": args.tasks, "pool": args.pool})
    print(f"analyzed {len(records)} records into {out}")
    return EXIT_OK


def cmd_shapley(args) -> int:
    scn = load_scenario(args.scenario)
    game = coalition_value_game(
        scn, metric=args.metric, spend_penalty=args.spend_penalty, no_memory=args.no_memory
    )
    values = shapley(game)
    shares, had_negative = normalized_shares(values)
    out = _out_dir(args)
    write_json(
        out / "shapley.json",
        {
            "metric": args.metric,
            "raw_values": {k: values[k] for k in sorted(values)},
            "shares_percent": {k: shares[k] for k in sorted(shares)},
            "negative_values_present": had_negative,
            "grand_coalition_value": game.value(frozenset(game.players)),
        },
    )
    _manifest(out, "shapley", {"scenario": args.scenario}, seed=scn.seed)
    for agent in sorted(values):
        print(f"{agent}: raw {values[agent]:.4f}, share {shares[agent]:.1f}%")
    return EXIT_OK


def cmd_oracle(args) -> int:
    matrix = load_matrix(args.matrix)
    pool = load_pool(args.pool)
    correctness = correctness_from_matrix(matrix)
    routes = oracle_route(correctness, pool.profiles)
    tokens = {
        row["task_id"]: {a: int(v["trace_tokens"]) for a, v in row["agents"].items()}
        for row in matrix
    }
    prices = prices_of(pool.profiles)
    n = len(routes)
    correct = sum(1 for t, a in routes.items() if correctness[t][a])
    spend = sum(prices[a] * tokens[t][a] / 1e6 for t, a in routes.items())
    total_tokens = sum(tokens[t][a] for t, a in routes.items())
    doc = {
        "routes": {k: routes[k] for k in sorted(routes)},
        "pass_at_1": 100.0 * correct / n if n else 0.0,
        "spend": spend,
        "dollars_per_mtok": spend / total_tokens * 1e6 if total_tokens else 0.0,
    }
    if args.transcript:
        records = load_transcript(args.transcript)
        chosen = {r.task_id: r.final_winner for r in records if r.task_id in correctness}
        diagnoses = diagnose(chosen, routes, correctness, pool.profiles)
        doc["diagnoses"] = {
            d.task_id: {
                "category": d.category.value,
                "chosen": d.chosen,
                "oracle_choice": d.oracle_choice,
            }
            for d in diagnoses
        }
        doc["confusion_matrix"] = confusion_matrix(diagnoses, chosen, routes, pool.profiles)
    out = _out_dir(args)
    write_json(out / "oracle.json", doc)
    _manifest(out, "oracle", {"matrix": args.matrix, "pool": args.pool, "transcript": args.transcript})
    print(f"oracle pass@1 {doc['pass_at_1']:.1f} at $/Mt {doc['dollars_per_mtok']:.3f}")
    return EXIT_OK


def cmd_wtp(args) -> int:
    from .embedding import make_embedder
    from .wtp import TrainingPoint, WtpModel

    matrix = load_matrix(args.matrix)
    tasks = load_tasks(args.tasks)
    pool = load_pool(args.pool)
    tasks_by_id = {t.id: t for t in tasks}
    embedder = make_embedder("hash", dim=args.embedding_dim, seed=args.embedding_seed)
    points = []
    for row in matrix:
        task = tasks_by_id.get(row["task_id"])
        if task is None:
            raise FileFormatError(f"matrix task {row['task_id']} not in the task file")
        points.append(
            TrainingPoint(
                embedding=embedder.embed(task.prompt),
                quality={a: 1.0 if v["correct"] else 0.0 for a, v in row["agents"].items()},
                cost={a: float(v["spend"]) for a, v in row["agents"].items()},
            )
        )
    model = WtpModel(points, prices_of(pool.profiles), k=args.k, wtp=args.wtp)
    correctness = correctness_from_matrix(matrix)
    routes = {}
    for task in tasks:
        routes[task.id] = model.route(embedder.embed(task.prompt))
    evaluable = [t for t in routes if t in correctness]
    correct = sum(1 for t in evaluable if correctness[t][routes[t]])
    doc = {
        "k": args.k,
        "wtp": args.wtp,
        "routes": {k: routes[k] for k in sorted(routes)},
        "pass_at_1": 100.0 * correct / len(evaluable) if evaluable else None,
    }
    out = _out_dir(args)
    write_json(out / "wtp.json", doc)
    _manifest(out, "wtp", {"matrix": args.matrix, "tasks": args.tasks, "pool": args.pool})
    print(f"wtp routed {len(routes)} tasks")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="strategy-auction", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tune-weights", help="learn scoring weights from a feature dump")
    p.add_argument("--tasks", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--pool", required=True)
    p.add_argument("--domain", required=True, help="domain tag stored in the weight file")
    p.add_argument("--big-m", type=float, default=1e4)
    p.add_argument("--weight-bound", type=float, default=1.0)
    p.add_argument("--ablate", nargs="*", default=None,
                   help="ablation flags: price length entropy jury self_judgment")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tune_weights)

    p = sub.add_parser("run-auction", help="auction a task file through a pool")
    p.add_argument("--tasks", required=True)
    p.add_argument("--pool", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-memory", action="store_true")
    p.add_argument("--permute", action="store_true")
    p.add_argument("--retrieval-k", type=int, default=8)
    p.add_argument("--domain", default="deep_search")
    p.add_argument("--embedding-dim", type=int, default=256)
    p.add_argument("--embedding-seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run_auction)

    p = sub.add_parser("simulate", help="seeded permutation runs over a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--no-memory", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate-all", help="run every agent on every task")
    p.add_argument("--tasks", required=True)
    p.add_argument("--pool", required=True)
    p.add_argument("--domain", default="deep_search")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate_all)

    p = sub.add_parser("analyze", help="binned metrics and selection curves from a transcript")
    p.add_argument("--transcript", required=True)
    p.add_argument("--tasks", required=True)
    p.add_argument("--pool", required=True)
    p.add_argument("--no-overhead", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("shapley", help="exact Shapley attribution over the pool")
    p.add_argument("--scenario", required=True)
    p.add_argument("--metric", choices=("pass_at_1", "utility"), default="pass_at_1")
    p.add_argument("--spend-penalty", type=float, default=0.0)
    p.add_argument("--no-memory", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_shapley)

    p = sub.add_parser("oracle", help="hindsight routing and diagnostics from a matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--pool", required=True)
    p.add_argument("--transcript", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("wtp", help="willingness-to-pay k-NN baseline")
    p.add_argument("--matrix", required=True)
    p.add_argument("--tasks", required=True)
    p.add_argument("--pool", required=True)
    p.add_argument("--k", type=int, default=50)
    p.add_argument("--wtp", type=float, default=5.0)
    p.add_argument("--embedding-dim", type=int, default=256)
    p.add_argument("--embedding-seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_wtp)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (WeightPoolMismatchError, MixedEmbedderError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (BigMValidationError, SizeGuardError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER_GUARD
    except DomainError as exc:
        from .agents import GatewayError
        from .engine import AuctionError

        if isinstance(exc, (GatewayError, AuctionError)):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_GATEWAY
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    raise SystemExit(main())
