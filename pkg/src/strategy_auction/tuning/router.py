"""Routing with learned weights: lowest cost-minus-value wins."""

from __future__ import annotations

from ..domain import DomainError, ScoringWeights
from ..scoring import FeatureRow, net

TIE_BREAKS = ("price_then_id", "id")


def rank_key(row: FeatureRow, net_value: float, tie_break: str = "price_then_id"):
    if tie_break == "price_then_id":
        return (net_value, row.price, row.agent_id)
    if tie_break == "id":
        return (net_value, row.agent_id)
    raise DomainError(f"unknown tie-break policy {tie_break!r}")


def route_with_weights(
    rows: list[FeatureRow],
    w: ScoringWeights,
    tie_break: str = "price_then_id",
) -> str:
    """Agent with minimal net; ties go to the cheaper agent, then lower id."""
    if not rows:
        raise DomainError("route_with_weights needs at least one feature row")
    best = min(rows, key=lambda r: rank_key(r, net(r, w).net, tie_break))
    return best.agent_id
