"""Shared domain types for the strategy-auction pipeline.

Every type is an immutable value object; construction validates the
invariants, so instances can be shared freely between concurrent contexts.
Each type serializes to a plain dict (``to_dict``) and parses back with
``from_dict``; round-tripping yields an equal value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum

ROLES = ("bidder", "judge", "executor")
DEFAULT_SCORE_RANGE = (0, 5)

WON = "won"
LOST = "lost"


class DomainError(ValueError):
    """Raised when a domain invariant is violated at construction."""


class TaskDomain(str, Enum):
    DEEP_SEARCH = "deep_search"
    CODING = "coding"
    OTHER = "other"


@dataclass(frozen=True)
class AgentProfile:
    """One agent in the pool: identity, size, price, and roles."""

    id: str
    params: int
    price_per_mtok: Decimal
    roles: frozenset[str] = frozenset(ROLES)
    endpoint: str | None = None

    def __post_init__(self):
        if not self.id:
            raise DomainError("agent id must be non-empty")
        if self.params <= 0:
            raise DomainError(f"agent {self.id}: params must be positive")
        if self.price_per_mtok <= 0:
            raise DomainError(f"agent {self.id}: price_per_mtok must be positive")
        bad = set(self.roles) - set(ROLES)
        if bad:
            raise DomainError(f"agent {self.id}: unknown roles {sorted(bad)}")

    @property
    def price(self) -> float:
        return float(self.price_per_mtok)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "params": self.params,
            "price_per_mtok": str(self.price_per_mtok),
            "roles": sorted(self.roles),
            "endpoint": self.endpoint,
        }

    @classmethod
    def from_dict(cls, d: dict) -> AgentProfile:
        return cls(
            id=d["id"],
            params=int(d["params"]),
            price_per_mtok=Decimal(str(d["price_per_mtok"])),
            roles=frozenset(d.get("roles") or ROLES),
            endpoint=d.get("endpoint"),
        )


@dataclass(frozen=True)
class Task:
    id: str
    domain: TaskDomain
    prompt: str
    tau_minutes: float | None = None
    reference_answer: str | None = None
    context: str | None = None
    source: str | None = None

    def __post_init__(self):
        if not self.id:
            raise DomainError("task id must be non-empty")
        if self.tau_minutes is not None and self.tau_minutes <= 0:
            raise DomainError(f"task {self.id}: tau_minutes must be positive when present")

    def to_dict(self) -> dict:
        d = {"id": self.id, "domain": self.domain.value, "prompt": self.prompt}
        if self.tau_minutes is not None:
            d["tau_minutes"] = self.tau_minutes
        if self.reference_answer is not None:
            d["reference_answer"] = self.reference_answer
        if self.context is not None:
            d["context"] = self.context
        if self.source is not None:
            d["source"] = self.source
        return d

    @classmethod
    def from_dict(cls, d: dict) -> Task:
        tau = d.get("tau_minutes")
        return cls(
            id=d["id"],
            domain=TaskDomain(d.get("domain", "other")),
            prompt=d["prompt"],
            tau_minutes=float(tau) if tau is not None else None,
            reference_answer=d.get("reference_answer"),
            context=d.get("context"),
            source=d.get("source"),
        )


@dataclass(frozen=True)
class ComplexityBin:
    """Half-open solution-time interval (lower, upper], in minutes."""

    lower_exclusive: float
    upper_inclusive: float
    label: str

    def __post_init__(self):
        if self.upper_inclusive <= self.lower_exclusive:
            raise DomainError(f"bin {self.label}: empty interval")

    def contains(self, tau: float) -> bool:
        return self.lower_exclusive < tau <= self.upper_inclusive


UNBINNED = "unbinned"


def default_bins() -> list[ComplexityBin]:
    """Five bins spanning 6 seconds to 60 minutes, adjacent bounds 5x apart."""
    bounds = [0.0, 0.1, 0.5, 2.5, 12.5, 60.0]
    return [
        ComplexityBin(lo, hi, f"<={hi:g}")
        for lo, hi in zip(bounds[:-1], bounds[1:])
    ]


def assign_bin(tau_minutes: float, schedule: list[ComplexityBin] | None = None) -> ComplexityBin | str:
    """Return the unique bin containing tau, or the unbinned bucket label.

    Bins are (lower, upper] intervals; tau must be strictly positive.
    """
    if tau_minutes <= 0:
        raise DomainError(f"tau_minutes must be positive, got {tau_minutes}")
    for b in schedule if schedule is not None else default_bins():
        if b.contains(tau_minutes):
            return b
    return UNBINNED


def bin_label(tau_minutes: float | None, schedule: list[ComplexityBin] | None = None) -> str:
    """Label of the bin for tau, or the unbinned bucket for missing/out-of-range tau."""
    if tau_minutes is None:
        return UNBINNED
    b = assign_bin(tau_minutes, schedule)
    return b.label if isinstance(b, ComplexityBin) else UNBINNED


@dataclass(frozen=True)
class Bid:
    """A strategy text and the features the auction scores it by."""

    agent_id: str
    strategy_text: str
    token_count: int
    entropy: float
    jury_scores: dict[str, int] = field(default_factory=dict)
    refined: bool = False
    overhead_tokens: int = 0
    score_range: tuple[int, int] = DEFAULT_SCORE_RANGE

    def __post_init__(self):
        if self.token_count < 1:
            raise DomainError(f"bid by {self.agent_id}: token_count must be >= 1")
        if not 0.0 <= self.entropy <= 1.0:
            raise DomainError(f"bid by {self.agent_id}: entropy {self.entropy} outside [0, 1]")
        if self.overhead_tokens < 0:
            raise DomainError(f"bid by {self.agent_id}: negative overhead_tokens")
        lo, hi = self.score_range
        for judge, score in self.jury_scores.items():
            if not isinstance(score, int) or not lo <= score <= hi:
                raise DomainError(
                    f"bid by {self.agent_id}: judge {judge} score {score} outside [{lo}, {hi}]"
                )

    @property
    def key(self) -> str:
        """Stable identity of this bid inside one auction record."""
        return f"{self.agent_id}#{'r' if self.refined else 'i'}"

    def to_dict(self) -> dict:
        return {
            "agent_id": self.agent_id,
            "strategy_text": self.strategy_text,
            "token_count": self.token_count,
            "entropy": self.entropy,
            "jury_scores": {k: self.jury_scores[k] for k in sorted(self.jury_scores)},
            "refined": self.refined,
            "overhead_tokens": self.overhead_tokens,
            "score_range": list(self.score_range),
        }

    @classmethod
    def from_dict(cls, d: dict) -> Bid:
        return cls(
            agent_id=d["agent_id"],
            strategy_text=d["strategy_text"],
            token_count=int(d["token_count"]),
            entropy=float(d["entropy"]),
            jury_scores={k: int(v) for k, v in d.get("jury_scores", {}).items()},
            refined=bool(d.get("refined", False)),
            overhead_tokens=int(d.get("overhead_tokens", 0)),
            score_range=tuple(d.get("score_range", DEFAULT_SCORE_RANGE)),
        )


ABLATABLE = ("price", "length", "entropy", "jury", "self_judgment")


@dataclass(frozen=True)
class ScoringWeights:
    """The learned scoring vector shared by tuning and routing."""

    w_c: float
    w_h: float
    w_judge: dict[str, float]
    score_range: tuple[int, int] = DEFAULT_SCORE_RANGE
    ablation_mask: frozenset[str] = frozenset()
    tuned_on: str | None = None

    def __post_init__(self):
        bad = set(self.ablation_mask) - set(ABLATABLE)
        if bad:
            raise DomainError(f"unknown ablation flags {sorted(bad)}")

    @property
    def judges(self) -> list[str]:
        return sorted(self.w_judge)

    def to_dict(self) -> dict:
        return {
            "w_c": self.w_c,
            "w_h": self.w_h,
            "w_judge": {k: self.w_judge[k] for k in sorted(self.w_judge)},
            "score_range": list(self.score_range),
            "ablation_mask": sorted(self.ablation_mask),
            "tuned_on": self.tuned_on,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ScoringWeights:
        return cls(
            w_c=float(d["w_c"]),
            w_h=float(d["w_h"]),
            w_judge={k: float(v) for k, v in d["w_judge"].items()},
            score_range=tuple(d.get("score_range", DEFAULT_SCORE_RANGE)),
            ablation_mask=frozenset(d.get("ablation_mask", ())),
            tuned_on=d.get("tuned_on"),
        )


@dataclass(frozen=True)
class CostValue:
    cost: float
    value: float

    @property
    def net(self) -> float:
        return self.cost - self.value


@dataclass(frozen=True)
class ExecutionResult:
    answer: str
    correct: bool | None
    trace_tokens: int
    spend: float

    def __post_init__(self):
        if self.trace_tokens < 0:
            raise DomainError("trace_tokens must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "answer": self.answer,
            "correct": self.correct,
            "trace_tokens": self.trace_tokens,
            "spend": self.spend,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ExecutionResult:
        return cls(
            answer=d["answer"],
            correct=d.get("correct"),
            trace_tokens=int(d["trace_tokens"]),
            spend=float(d["spend"]),
        )


@dataclass(frozen=True)
class AuctionRecord:
    """One task's full auction outcome; the memory-bank row.

    ``outcome_label`` maps each bid key to won/lost with exactly one bid
    labeled won.  ``bid_nets`` keeps the cost-minus-value each bid scored
    at auction time so later consumers (contrastive-pair construction)
    need not re-derive the scoring weights.
    """

    task_id: str
    initial_bids: tuple[Bid, ...]
    refined_bids: tuple[Bid, ...]
    provisional_winner: str
    final_winner: str
    winning_strategy: str
    outcome_label: dict[str, str]
    bid_nets: dict[str, float]
    execution: ExecutionResult | None
    sequence_index: int

    def __post_init__(self):
        winners = [k for k, v in self.outcome_label.items() if v == WON]
        if len(winners) != 1:
            raise DomainError(f"record {self.task_id}: expected exactly one won bid, got {winners}")
        if self.provisional_winner not in {b.agent_id for b in self.initial_bids}:
            raise DomainError(
                f"record {self.task_id}: provisional winner {self.provisional_winner} "
                "not among initial bidders"
            )
        keys = {b.key for b in self.all_bids()}
        if set(self.outcome_label) != keys or set(self.bid_nets) != keys:
            raise DomainError(f"record {self.task_id}: labels/nets do not cover the bids")

    def all_bids(self) -> tuple[Bid, ...]:
        return self.initial_bids + self.refined_bids

    @property
    def winning_bid(self) -> Bid:
        key = next(k for k, v in self.outcome_label.items() if v == WON)
        return next(b for b in self.all_bids() if b.key == key)

    def overhead_tokens(self) -> int:
        return sum(b.overhead_tokens for b in self.all_bids())

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "initial_bids": [b.to_dict() for b in self.initial_bids],
            "refined_bids": [b.to_dict() for b in self.refined_bids],
            "provisional_winner": self.provisional_winner,
            "final_winner": self.final_winner,
            "winning_strategy": self.winning_strategy,
            "outcome_label": {k: self.outcome_label[k] for k in sorted(self.outcome_label)},
            "bid_nets": {k: self.bid_nets[k] for k in sorted(self.bid_nets)},
            "execution": self.execution.to_dict() if self.execution else None,
            "sequence_index": self.sequence_index,
        }

    @classmethod
    def from_dict(cls, d: dict) -> AuctionRecord:
        return cls(
            task_id=d["task_id"],
            initial_bids=tuple(Bid.from_dict(b) for b in d["initial_bids"]),
            refined_bids=tuple(Bid.from_dict(b) for b in d["refined_bids"]),
            provisional_winner=d["provisional_winner"],
            final_winner=d["final_winner"],
            winning_strategy=d["winning_strategy"],
            outcome_label=dict(d["outcome_label"]),
            bid_nets={k: float(v) for k, v in d["bid_nets"].items()},
            execution=ExecutionResult.from_dict(d["execution"]) if d.get("execution") else None,
            sequence_index=int(d["sequence_index"]),
        )


def dumps(obj: dict) -> str:
    """Canonical single-line JSON used by every line-delimited file."""
    return json.dumps(obj, ensure_ascii=True, separators=(",", ":"))
