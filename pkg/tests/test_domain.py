from __future__ import annotations

from decimal import Decimal

import pytest

from strategy_auction.domain import (
    UNBINNED,
    AgentProfile,
    AuctionRecord,
    Bid,
    ComplexityBin,
    DomainError,
    ExecutionResult,
    ScoringWeights,
    Task,
    TaskDomain,
    assign_bin,
    bin_label,
    default_bins,
)


def test_default_schedule_is_five_geometric_bins():
    bins = default_bins()
    assert len(bins) == 5
    bounds = [b.lower_exclusive for b in bins] + [bins[-1].upper_inclusive]
    assert bounds == [0.0, 0.1, 0.5, 2.5, 12.5, 60.0]
    # 5x progression between interior bounds; the last bin caps at the hour.
    for lo, hi in zip(bounds[1:4], bounds[2:5]):
        assert hi / lo == pytest.approx(5.0)


def test_assign_bin_examples():
    assert assign_bin(0.05).upper_inclusive == 0.1
    # Upper bound is inclusive.
    assert assign_bin(0.1).upper_inclusive == 0.1
    assert assign_bin(61) == UNBINNED


def test_assign_bin_rejects_nonpositive():
    with pytest.raises(DomainError):
        assign_bin(0.0)
    with pytest.raises(DomainError):
        assign_bin(-1.0)


def test_bin_partition_on_grid():
    bins = default_bins()
    for i in range(1, 10_001):
        tau = 60.0 * i / 10_000
        hits = [b for b in bins if b.contains(tau)]
        assert len(hits) == 1, f"tau={tau} hit {len(hits)} bins"


def test_bin_label_handles_missing_tau():
    assert bin_label(None) == UNBINNED
    assert bin_label(0.3) == "<=0.5"


def test_agent_profile_validation():
    with pytest.raises(DomainError):
        AgentProfile(id="x", params=0, price_per_mtok=Decimal("0.1"))
    with pytest.raises(DomainError):
        AgentProfile(id="x", params=4, price_per_mtok=Decimal("0"))
    with pytest.raises(DomainError):
        AgentProfile(id="x", params=4, price_per_mtok=Decimal("0.1"), roles=frozenset({"owner"}))


def test_bid_validation():
    with pytest.raises(DomainError):
        Bid(agent_id="a", strategy_text="s", token_count=0, entropy=0.5)
    with pytest.raises(DomainError):
        Bid(agent_id="a", strategy_text="s", token_count=10, entropy=1.5)
    with pytest.raises(DomainError):
        Bid(agent_id="a", strategy_text="s", token_count=10, entropy=0.5, jury_scores={"j": 9})
    bid = Bid(agent_id="a", strategy_text="s", token_count=10, entropy=0.5, jury_scores={"j": 5})
    assert bid.key == "a#i"


def test_task_validation():
    with pytest.raises(DomainError):
        Task(id="t", domain=TaskDomain.OTHER, prompt="p", tau_minutes=0.0)


def test_weights_reject_unknown_ablation():
    with pytest.raises(DomainError):
        ScoringWeights(w_c=1.0, w_h=0.0, w_judge={}, ablation_mask=frozenset({"bogus"}))


def _sample_record() -> AuctionRecord:
    bids = (
        Bid(agent_id="a", strategy_text="plan a", token_count=10, entropy=0.5, jury_scores={"a": 3, "b": 4}),
        Bid(agent_id="b", strategy_text="plan b", token_count=12, entropy=0.6, jury_scores={"a": 2, "b": 5}),
    )
    refined = (
        Bid(agent_id="a", strategy_text="plan a2", token_count=9, entropy=0.55,
            jury_scores={"a": 4, "b": 4}, refined=True),
    )
    return AuctionRecord(
        task_id="t1",
        initial_bids=bids,
        refined_bids=refined,
        provisional_winner="b",
        final_winner="a",
        winning_strategy="plan a2",
        outcome_label={"a#i": "lost", "b#i": "lost", "a#r": "won"},
        bid_nets={"a#i": 1.5, "b#i": 1.2, "a#r": 0.9},
        execution=ExecutionResult(answer="42", correct=True, trace_tokens=5000, spend=0.00025),
        sequence_index=3,
    )


def test_record_invariants():
    record = _sample_record()
    assert record.winning_bid.key == "a#r"
    assert record.overhead_tokens() == 0
    with pytest.raises(DomainError):
        AuctionRecord(
            task_id="t1",
            initial_bids=record.initial_bids,
            refined_bids=record.refined_bids,
            provisional_winner="b",
            final_winner="a",
            winning_strategy="x",
            outcome_label={"a#i": "won", "b#i": "won", "a#r": "lost"},
            bid_nets=record.bid_nets,
            execution=None,
            sequence_index=0,
        )


def test_round_trips():
    profile = AgentProfile(id="a", params=4, price_per_mtok=Decimal("0.05"), endpoint="http://x")
    assert AgentProfile.from_dict(profile.to_dict()) == profile

    task = Task(id="t", domain=TaskDomain.CODING, prompt="p", tau_minutes=1.5,
                reference_answer="42", context="ctx", source="unit")
    assert Task.from_dict(task.to_dict()) == task

    weights = ScoringWeights(w_c=0.1, w_h=-0.2, w_judge={"a": 1.0, "b": -2.0},
                             ablation_mask=frozenset({"jury"}), tuned_on="dev")
    assert ScoringWeights.from_dict(weights.to_dict()) == weights

    record = _sample_record()
    assert AuctionRecord.from_dict(record.to_dict()) == record
