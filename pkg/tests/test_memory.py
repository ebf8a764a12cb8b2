from __future__ import annotations

import random

import numpy as np
import pytest

from strategy_auction.domain import AuctionRecord, Bid, DomainError
from strategy_auction.embedding import HashingEmbedder, make_embedder
from strategy_auction.memory import (
    ContrastivePair,
    DimensionMismatchError,
    DuplicateTaskError,
    MemoryBank,
    MixedEmbedderError,
)


def make_record(task_id: str, winner="w", loser="l", winner_refined=False,
                extra_losers=(), nets=None) -> AuctionRecord:
    initial = [
        Bid(agent_id=loser, strategy_text=f"losing plan {task_id} by {loser}",
            token_count=50, entropy=0.4, jury_scores={}),
        Bid(agent_id=winner, strategy_text=f"winning plan {task_id} by {winner}",
            token_count=60, entropy=0.6, jury_scores={}),
    ]
    for extra in extra_losers:
        initial.append(
            Bid(agent_id=extra, strategy_text=f"losing plan {task_id} by {extra}",
                token_count=55, entropy=0.5, jury_scores={})
        )
    refined = []
    if winner_refined:
        refined.append(
            Bid(agent_id=winner, strategy_text=f"refined winning plan {task_id}",
                token_count=55, entropy=0.65, jury_scores={}, refined=True)
        )
    winner_key = f"{winner}#r" if winner_refined else f"{winner}#i"
    all_bids = initial + refined
    labels = {b.key: ("won" if b.key == winner_key else "lost") for b in all_bids}
    default_nets = {b.key: float(i) for i, b in enumerate(all_bids)}
    default_nets[winner_key] = -1.0
    return AuctionRecord(
        task_id=task_id,
        initial_bids=tuple(initial),
        refined_bids=tuple(refined),
        provisional_winner=initial[0].agent_id,
        final_winner=winner,
        winning_strategy=all_bids[-1].strategy_text if winner_refined else initial[1].strategy_text,
        outcome_label=labels,
        bid_nets=nets or default_nets,
        execution=None,
        sequence_index=0,
    )


def unit_vec(dim: int, idx: int) -> np.ndarray:
    v = np.zeros(dim)
    v[idx % dim] = 1.0
    return v


def test_append_and_read_back():
    bank = MemoryBank(embedder_tag="test", dim=8)
    record = make_record("t0")
    bank.append(record, unit_vec(8, 0))
    assert len(bank) == 1
    assert bank.records[0] == record
    with pytest.raises(DuplicateTaskError):
        bank.append(make_record("t0"), unit_vec(8, 1))


def test_append_preserves_order_and_count():
    bank = MemoryBank(embedder_tag="test", dim=8)
    for i in range(10):
        bank.append(make_record(f"t{i}"), unit_vec(8, i))
    assert bank.task_ids == [f"t{i}" for i in range(10)]
    assert len(bank.retrieve_top_k(unit_vec(8, 0), 100)) == 10


def test_retrieve_empty_bank():
    bank = MemoryBank(embedder_tag="test", dim=4)
    assert bank.retrieve_top_k(unit_vec(4, 0), 8) == []


def test_retrieve_exact_match_first():
    bank = MemoryBank(embedder_tag="test", dim=8)
    rng = np.random.default_rng(0)
    for i in range(20):
        bank.append(make_record(f"t{i}"), rng.normal(size=8))
    query = bank._vectors[7]
    top = bank.retrieve_top_k(query, 3)
    assert top[0] == "t7"
    sims = bank.similarities(query)
    assert sims[7] == pytest.approx(1.0, abs=1e-9)


def test_retrieve_ties_break_by_insertion_order():
    bank = MemoryBank(embedder_tag="test", dim=4)
    v = np.array([1.0, 0.0, 0.0, 0.0])
    for i in range(5):
        bank.append(make_record(f"t{i}"), v.copy())
    assert bank.retrieve_top_k(v, 3) == ["t0", "t1", "t2"]


def _brute_force_top_k(vectors, task_ids, query, k):
    def cosine(a, b):
        na = np.linalg.norm(a) or 1.0
        nb = np.linalg.norm(b) or 1.0
        return float(np.dot(a, b) / (na * nb))

    scored = sorted(
        ((-cosine(v, query), i) for i, v in enumerate(vectors)),
    )
    return [task_ids[i] for _, i in scored[: min(k, len(vectors))]]


def test_retrieve_matches_full_scan_oracle():
    rng = np.random.default_rng(42)
    bank = MemoryBank(embedder_tag="test", dim=16)
    vectors = []
    for i in range(300):
        v = rng.normal(size=16)
        vectors.append(v)
        bank.append(make_record(f"t{i}"), v)
    for _ in range(20):
        query = rng.normal(size=16)
        assert bank.retrieve_top_k(query, 8) == _brute_force_top_k(
            vectors, bank.task_ids, query, 8
        )


def test_k_clamp():
    rng = np.random.default_rng(1)
    bank = MemoryBank(embedder_tag="test", dim=8)
    for i in range(5):
        bank.append(make_record(f"t{i}"), rng.normal(size=8))
    query = rng.normal(size=8)
    assert len(bank.retrieve_top_k(query, 3)) == 3
    assert len(bank.retrieve_top_k(query, 5)) == 5
    assert len(bank.retrieve_top_k(query, 9)) == 5
    with pytest.raises(DomainError):
        bank.retrieve_top_k(query, 0)


def test_dimension_mismatch():
    bank = MemoryBank(embedder_tag="test", dim=8)
    with pytest.raises(DimensionMismatchError):
        bank.append(make_record("t0"), np.zeros(4))
    bank.append(make_record("t0"), np.zeros(8))
    with pytest.raises(DimensionMismatchError):
        bank.retrieve_top_k(np.zeros(4), 1)


def test_build_pairs_agent_lost():
    bank = MemoryBank(embedder_tag="test", dim=4)
    bank.append(make_record("t0", winner="w", loser="l"), unit_vec(4, 0))
    pairs = bank.build_pairs(["t0"], "l")
    assert pairs == [
        ContrastivePair(
            losing_strategy="losing plan t0 by l",
            winning_strategy="winning plan t0 by w",
            source_task_id="t0",
            owner="l",
        )
    ]


def test_build_pairs_agent_won_uses_worst_loser():
    nets = {"l#i": 2.0, "w#i": -1.0, "x#i": 5.0}
    record = make_record("t0", winner="w", loser="l", extra_losers=("x",), nets=nets)
    bank = MemoryBank(embedder_tag="test", dim=4)
    bank.append(record, unit_vec(4, 0))
    pairs = bank.build_pairs(["t0"], "w")
    assert len(pairs) == 1
    assert pairs[0].losing_strategy == "losing plan t0 by x"
    assert pairs[0].winning_strategy == "winning plan t0 by w"


def test_build_pairs_skips_absent_agent():
    bank = MemoryBank(embedder_tag="test", dim=4)
    bank.append(make_record("t0"), unit_vec(4, 0))
    assert bank.build_pairs(["t0"], "stranger") == []


def test_pair_ownership_invariant():
    rng = random.Random(5)
    bank = MemoryBank(embedder_tag="test", dim=4)
    agents = ["a", "b", "c"]
    for i in range(30):
        winner = rng.choice(agents)
        losers = [a for a in agents if a != winner]
        bank.append(
            make_record(f"t{i}", winner=winner, loser=losers[0], extra_losers=losers[1:]),
            unit_vec(4, i),
        )
    for agent in agents:
        for pair in bank.build_pairs(bank.task_ids, agent):
            record = bank.record_for(pair.source_task_id)
            owners = {b.agent_id for b in record.all_bids()}
            assert agent in owners
            assert (f"plan {pair.source_task_id} by {agent}" in pair.losing_strategy
                    or record.final_winner == agent)


def test_persistence_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    bank = MemoryBank(embedder_tag="hash-v1-d8-s0", dim=8)
    for i in range(12):
        bank.append(make_record(f"t{i}", winner_refined=(i % 3 == 0)), rng.normal(size=8))
    bank.save(tmp_path / "records.jsonl", tmp_path / "embeddings.jsonl")
    loaded = MemoryBank.load(tmp_path / "records.jsonl", tmp_path / "embeddings.jsonl")
    assert loaded.task_ids == bank.task_ids
    assert loaded.records == bank.records
    for a, b in zip(loaded._vectors, bank._vectors):
        assert a.tobytes() == b.tobytes()


def test_mixed_embedder_rejected(tmp_path):
    bank = MemoryBank(embedder_tag="hash-v1-d8-s0", dim=8)
    bank.append(make_record("t0"), np.zeros(8))
    bank.save(tmp_path / "r.jsonl", tmp_path / "e.jsonl")
    with pytest.raises(MixedEmbedderError):
        MemoryBank.load(tmp_path / "r.jsonl", tmp_path / "e.jsonl", expected_tag="hash-v1-d8-s9")


def test_hashing_embedder_determinism():
    e1 = HashingEmbedder(dim=64, seed=3)
    e2 = HashingEmbedder(dim=64, seed=3)
    text = "retrieve the annual figure from the archive"
    assert e1.embed(text).tobytes() == e2.embed(text).tobytes()


def test_embedder_self_similarity():
    emb = HashingEmbedder(dim=128, seed=0)
    v = emb.embed("compare the harbor records against the ledger")
    assert float(np.dot(v, v)) == pytest.approx(1.0, abs=1e-9)


def test_disjoint_vocabulary_low_similarity():
    emb = HashingEmbedder(dim=256, seed=0)
    words_a = " ".join(f"alpha{i}" for i in range(120))
    words_b = " ".join(f"omega{i}" for i in range(120))
    cos = float(np.dot(emb.embed(words_a), emb.embed(words_b)))
    assert abs(cos) < 0.2


def test_empty_text_rejected():
    emb = HashingEmbedder(dim=16, seed=0)
    with pytest.raises(DomainError):
        emb.embed("")


def test_registry():
    emb = make_embedder("hash", dim=32, seed=5)
    assert emb.dim == 32
    with pytest.raises(DomainError):
        make_embedder("nope")


def test_size_cap_sliding_window():
    bank = MemoryBank(embedder_tag="test", dim=4, max_records=3)
    for i in range(6):
        bank.append(make_record(f"t{i}"), unit_vec(4, i))
    assert bank.task_ids == ["t3", "t4", "t5"]
    assert len(bank.retrieve_top_k(unit_vec(4, 0), 10)) == 3
    with pytest.raises(DomainError):
        MemoryBank(embedder_tag="test", dim=4, max_records=0)
