from __future__ import annotations

import json
from pathlib import Path

import pytest

from strategy_auction.cli import (
    EXIT_FORMAT,
    EXIT_MISMATCH,
    EXIT_OK,
    EXIT_SOLVER_GUARD,
    main,
)

from conftest import DATA_DIR, SCENARIO_DIR


def run_cli(*argv) -> int:
    return main([str(a) for a in argv])


def small_scenario(tmp_path: Path, n_tasks: int = 24, seed: int = 5) -> Path:
    """A compact synthetic scenario written from scratch."""
    tasks = []
    taus = [0.05, 0.3, 1.5, 8.0, 30.0]
    for i in range(n_tasks):
        tasks.append({
            "id": f"s{i:03d}",
            "domain": "deep_search",
            "prompt": f"small scenario question {i} about item {i % 7}",
            "tau_minutes": taus[i % len(taus)],
        })
    (tmp_path / "tasks.jsonl").write_text(
        "".join(json.dumps(t) + "\n" for t in tasks)
    )
    synth = {
        "strategy_length_law": [100.0, 15.0],
        "entropy_law": [0.55, 0.05],
    }
    pool = {
        "agents": [
            {"id": "small", "params": 4,
             "synthetic": dict(synth, seed=1, refine_gain=0.14, quality_offset=-0.06,
                               skill_curve={"<=0.1": 0.9, "<=0.5": 0.8, "<=2.5": 0.6,
                                            "<=12.5": 0.3, "<=60": 0.1})},
            {"id": "large", "params": 32,
             "synthetic": dict(synth, seed=2, refine_gain=0.05,
                               skill_curve={"<=0.1": 0.97, "<=0.5": 0.92, "<=2.5": 0.85,
                                            "<=12.5": 0.7, "<=60": 0.5})},
        ],
        "trace_token_law": {"<=0.1": 1000.0, "<=0.5": 2000.0, "<=2.5": 5000.0,
                            "<=12.5": 10000.0, "<=60": 20000.0},
    }
    (tmp_path / "pool.json").write_text(json.dumps(pool, indent=2))
    weights = {
        "w_c": 0.004, "w_h": 0.5,
        "w_judge": {"small": 0.08, "large": 0.08},
        "score_range": [0, 5], "ablation_mask": [], "tuned_on": "unit",
    }
    (tmp_path / "weights.json").write_text(json.dumps(weights))
    manifest = {
        "name": "unit", "tasks": "tasks.jsonl", "pool": "pool.json",
        "weights": "weights.json", "retrieval_k": 4, "seed": seed,
        "embedder": {"name": "hash", "dim": 64, "seed": 0}, "score_range": [0, 5],
    }
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(manifest))
    return path


def test_run_auction_deterministic_transcripts(tmp_path):
    scenario = small_scenario(tmp_path)
    outs = []
    for name in ("run_a", "run_b"):
        code = run_cli(
            "run-auction",
            "--tasks", tmp_path / "tasks.jsonl",
            "--pool", tmp_path / "pool.json",
            "--weights", tmp_path / "weights.json",
            "--seed", 3,
            "--permute",
            "--embedding-dim", 64,
            "--out", tmp_path / name,
        )
        assert code == EXIT_OK
        outs.append((tmp_path / name / "transcript.jsonl").read_bytes())
    assert outs[0] == outs[1]


def test_run_auction_inputs_not_mutated(tmp_path):
    scenario = small_scenario(tmp_path)
    before = {
        p.name: p.read_bytes()
        for p in (tmp_path / "tasks.jsonl", tmp_path / "pool.json", tmp_path / "weights.json")
    }
    assert run_cli(
        "run-auction", "--tasks", tmp_path / "tasks.jsonl", "--pool", tmp_path / "pool.json",
        "--weights", tmp_path / "weights.json", "--seed", 1, "--out", tmp_path / "out",
    ) == EXIT_OK
    for p in (tmp_path / "tasks.jsonl", tmp_path / "pool.json", tmp_path / "weights.json"):
        assert p.read_bytes() == before[p.name]


def test_no_memory_flag_disables_refinement(tmp_path):
    scenario = small_scenario(tmp_path)
    assert run_cli(
        "run-auction", "--tasks", tmp_path / "tasks.jsonl", "--pool", tmp_path / "pool.json",
        "--weights", tmp_path / "weights.json", "--seed", 1, "--no-memory",
        "--out", tmp_path / "nomem",
    ) == EXIT_OK
    records = [
        json.loads(line)
        for line in (tmp_path / "nomem" / "transcript.jsonl").read_text().splitlines()
    ]
    for record in records:
        assert record["refined_bids"] == []
        assert record["final_winner"] == record["provisional_winner"]
    assert not (tmp_path / "nomem" / "memory.jsonl").exists()


def test_simulate_summary_shape(tmp_path):
    scenario = small_scenario(tmp_path)
    assert run_cli("simulate", "--scenario", scenario, "--runs", 2,
                   "--out", tmp_path / "sim") == EXIT_OK
    summary = json.loads((tmp_path / "sim" / "summary.json").read_text())
    assert summary["runs"] == 2
    overall = summary["bins"]["all"]
    # Mean/std pairs mirror the headline table's subscripted entries.
    assert set(overall["pass_at_1"]) == {"mean", "std"}
    assert set(overall["dollars_per_mtok"]) == {"mean", "std"}
    assert (tmp_path / "sim" / "transcript-run0.jsonl").exists()
    assert (tmp_path / "sim" / "transcript-run1.jsonl").exists()
    manifest = json.loads((tmp_path / "sim" / "manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert manifest["seed"] == 5


def test_evaluate_all_then_oracle_and_wtp(tmp_path):
    scenario = small_scenario(tmp_path)
    assert run_cli("evaluate-all", "--tasks", tmp_path / "tasks.jsonl",
                   "--pool", tmp_path / "pool.json", "--out", tmp_path / "eval") == EXIT_OK
    matrix_path = tmp_path / "eval" / "matrix.jsonl"
    rows = [json.loads(line) for line in matrix_path.read_text().splitlines()]
    assert len(rows) == 24
    assert set(rows[0]["agents"]) == {"small", "large"}

    assert run_cli("run-auction", "--tasks", tmp_path / "tasks.jsonl",
                   "--pool", tmp_path / "pool.json", "--weights", tmp_path / "weights.json",
                   "--seed", 1, "--out", tmp_path / "run") == EXIT_OK
    assert run_cli("oracle", "--matrix", matrix_path, "--pool", tmp_path / "pool.json",
                   "--transcript", tmp_path / "run" / "transcript.jsonl",
                   "--out", tmp_path / "oracle") == EXIT_OK
    doc = json.loads((tmp_path / "oracle" / "oracle.json").read_text())
    assert 0.0 <= doc["pass_at_1"] <= 100.0
    assert set(doc["diagnoses"]) == {f"s{i:03d}" for i in range(24)}
    for row in doc["confusion_matrix"].values():
        assert sum(row.values()) == pytest.approx(100.0, abs=1e-6)

    assert run_cli("wtp", "--matrix", matrix_path, "--tasks", tmp_path / "tasks.jsonl",
                   "--pool", tmp_path / "pool.json", "--k", 5, "--embedding-dim", 64,
                   "--out", tmp_path / "wtp") == EXIT_OK
    wtp_doc = json.loads((tmp_path / "wtp" / "wtp.json").read_text())
    assert len(wtp_doc["routes"]) == 24


def test_analyze_writes_csv_and_json(tmp_path):
    scenario = small_scenario(tmp_path)
    run_cli("run-auction", "--tasks", tmp_path / "tasks.jsonl", "--pool", tmp_path / "pool.json",
            "--weights", tmp_path / "weights.json", "--seed", 2, "--out", tmp_path / "run")
    assert run_cli("analyze", "--transcript", tmp_path / "run" / "transcript.jsonl",
                   "--tasks", tmp_path / "tasks.jsonl", "--pool", tmp_path / "pool.json",
                   "--out", tmp_path / "report") == EXIT_OK
    csv_text = (tmp_path / "report" / "report.csv").read_text()
    header = csv_text.splitlines()[0].split(",")
    assert header[:5] == ["bin", "n_tasks", "pass_at_1", "dollars_per_mtok", "mean_trace_tokens"]
    doc = json.loads((tmp_path / "report" / "report.json").read_text())
    assert "all" in doc["bins"]
    assert "cumulative_selection" in doc


def test_shapley_command(tmp_path):
    scenario = small_scenario(tmp_path, n_tasks=10)
    assert run_cli("shapley", "--scenario", scenario, "--out", tmp_path / "shap") == EXIT_OK
    doc = json.loads((tmp_path / "shap" / "shapley.json").read_text())
    assert set(doc["raw_values"]) == {"small", "large"}
    assert sum(doc["shares_percent"].values()) == pytest.approx(100.0, abs=1e-6)


def test_tune_weights_on_micro_fixture(tmp_path):
    fixture = DATA_DIR / "micro_tune"
    assert run_cli(
        "tune-weights",
        "--tasks", fixture / "tasks.jsonl",
        "--features", fixture / "features.jsonl",
        "--pool", fixture / "pool.json",
        "--domain", "coding",
        "--out", tmp_path / "tuned",
    ) == EXIT_OK
    report = json.loads((tmp_path / "tuned" / "solver_report.json").read_text())
    expected = json.loads((fixture / "expected.json").read_text())
    assert report["objective"] == pytest.approx(expected["objective"], abs=1e-6)
    weights = json.loads((tmp_path / "tuned" / "weights-coding.json").read_text())
    assert weights["tuned_on"] == "coding"
    assert set(weights["w_judge"]) == {"small", "large"}


def test_malformed_file_exit_code(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json\n")
    assert run_cli("analyze", "--transcript", bad, "--tasks", bad, "--pool", bad,
                   "--out", tmp_path / "x") == EXIT_FORMAT


def test_weight_pool_mismatch_exit_code(tmp_path):
    scenario = small_scenario(tmp_path)
    weights = json.loads((tmp_path / "weights.json").read_text())
    weights["w_judge"] = {"small": 0.08}
    (tmp_path / "weights.json").write_text(json.dumps(weights))
    assert run_cli("run-auction", "--tasks", tmp_path / "tasks.jsonl",
                   "--pool", tmp_path / "pool.json", "--weights", tmp_path / "weights.json",
                   "--seed", 1, "--out", tmp_path / "x") == EXIT_MISMATCH


def test_big_m_guard_exit_code(tmp_path):
    fixture = DATA_DIR / "micro_tune"
    assert run_cli(
        "tune-weights",
        "--tasks", fixture / "tasks.jsonl",
        "--features", fixture / "features.jsonl",
        "--pool", fixture / "pool.json",
        "--domain", "coding",
        "--big-m", 10.0,
        "--out", tmp_path / "tuned",
    ) == EXIT_SOLVER_GUARD


def test_shipped_scenario_loads():
    assert (SCENARIO_DIR / "scenario.json").exists()
    from strategy_auction.scenario import load_scenario

    scn = load_scenario(SCENARIO_DIR / "scenario.json")
    assert len(scn.tasks) == 500
    assert [p.id for p in scn.pool.profiles] == ["a4b", "a8b", "a14b", "a32b"]
    assert [str(p.price_per_mtok) for p in scn.pool.profiles] == ["0.05", "0.09", "0.16", "0.36"]
