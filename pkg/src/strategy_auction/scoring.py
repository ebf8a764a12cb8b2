"""Cost, value, and cost-minus-value of bids under a weight vector.

The scoring forms are affine in the weights; ``net_coefficients`` exposes
the per-weight feature coefficients so the tuner optimizes exactly the
same quantity the router evaluates.  Features enter unnormalized: there
is deliberately no scaling transform anywhere on this path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .domain import Bid, CostValue, DomainError, ScoringWeights


class MissingJudgeScoreError(DomainError):
    """A weighted judge has no score for the bid being valued."""

    def __init__(self, judge: str, agent_id: str):
        super().__init__(f"judge {judge} has no score for the bid by {agent_id}")
        self.judge = judge


@dataclass(frozen=True)
class FeatureRow:
    """The per-(task, agent) features consumed by scoring."""

    agent_id: str
    price: float
    token_count: int
    entropy: float
    jury_scores: dict[str, int] = field(default_factory=dict)
    refined: bool = False

    def __post_init__(self):
        if self.token_count < 1:
            raise DomainError(f"row for {self.agent_id}: token_count must be >= 1")

    @classmethod
    def from_bid(cls, bid: Bid, price: float) -> FeatureRow:
        return cls(
            agent_id=bid.agent_id,
            price=price,
            token_count=bid.token_count,
            entropy=bid.entropy,
            jury_scores=dict(bid.jury_scores),
            refined=bid.refined,
        )

    def to_dict(self) -> dict:
        return {
            "agent_id": self.agent_id,
            "price": self.price,
            "token_count": self.token_count,
            "entropy": self.entropy,
            "jury_scores": {k: self.jury_scores[k] for k in sorted(self.jury_scores)},
            "refined": self.refined,
        }

    @classmethod
    def from_dict(cls, d: dict) -> FeatureRow:
        return cls(
            agent_id=d["agent_id"],
            price=float(d["price"]),
            token_count=int(d["token_count"]),
            entropy=float(d["entropy"]),
            jury_scores={k: int(v) for k, v in d.get("jury_scores", {}).items()},
            refined=bool(d.get("refined", False)),
        )


def cost_coefficient(row: FeatureRow, mask: frozenset[str]) -> float:
    """Feature multiplying w_c, with masked factors replaced by 1."""
    price = 1.0 if "price" in mask else row.price
    length = 1.0 if "length" in mask else float(row.token_count)
    return price * length


def cost(row: FeatureRow, w: ScoringWeights) -> float:
    return w.w_c * cost_coefficient(row, w.ablation_mask)


def _jury_terms(row: FeatureRow, w: ScoringWeights) -> float:
    if "jury" in w.ablation_mask:
        return 0.0
    total = 0.0
    for judge in w.judges:
        if w.w_judge[judge] == 0.0:
            continue
        if "self_judgment" in w.ablation_mask and judge == row.agent_id:
            continue
        if judge not in row.jury_scores:
            raise MissingJudgeScoreError(judge, row.agent_id)
        total += w.w_judge[judge] * row.jury_scores[judge]
    return total


def value(row: FeatureRow, w: ScoringWeights) -> float:
    entropy_term = 0.0 if "entropy" in w.ablation_mask else w.w_h * row.entropy
    return entropy_term + _jury_terms(row, w)


def net(row: FeatureRow, w: ScoringWeights) -> CostValue:
    return CostValue(cost=cost(row, w), value=value(row, w))


def net_coefficients(
    row: FeatureRow,
    judges: list[str],
    mask: frozenset[str] = frozenset(),
) -> tuple[float, float, list[float]]:
    """Coefficients of (w_c, w_h, w_judge...) in cost-minus-value.

    Value terms enter negated.  Missing scores for listed judges raise,
    matching the routing-time contract.
    """
    a_c = cost_coefficient(row, mask)
    a_h = 0.0 if "entropy" in mask else -row.entropy
    a_j = []
    for judge in judges:
        if "jury" in mask or ("self_judgment" in mask and judge == row.agent_id):
            a_j.append(0.0)
            continue
        if judge not in row.jury_scores:
            raise MissingJudgeScoreError(judge, row.agent_id)
        a_j.append(-float(row.jury_scores[judge]))
    return a_c, a_h, a_j


def unit_weight_bound(row: FeatureRow, judges: list[str], mask: frozenset[str] = frozenset()) -> float:
    """A-priori bound on |cost - value| when every weight has magnitude one."""
    a_c, a_h, a_j = net_coefficients(row, judges, mask)
    return abs(a_c) + abs(a_h) + sum(abs(a) for a in a_j)
