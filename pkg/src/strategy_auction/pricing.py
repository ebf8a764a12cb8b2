"""Effective per-agent prices from an anchor rate and linear parameter scaling.

All arithmetic runs on ``decimal.Decimal`` so the published two-decimal
schedule is reproduced exactly (binary floats would round 0.045 the wrong
way).  The unrounded derivation is retained alongside the rounded price.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from .domain import AgentProfile, DomainError


@dataclass(frozen=True)
class PriceAnchor:
    """Reference point: a model size with known input/output token rates."""

    anchor_params: int
    input_price: Decimal
    output_price: Decimal
    io_ratio: tuple[int, int] = (4, 1)

    def __post_init__(self):
        if self.anchor_params <= 0:
            raise DomainError("anchor_params must be positive")
        if self.input_price <= 0 or self.output_price <= 0:
            raise DomainError("anchor prices must be positive")
        r_in, r_out = self.io_ratio
        if r_in <= 0 or r_out <= 0:
            raise DomainError("io_ratio components must be positive")

    def to_dict(self) -> dict:
        return {
            "anchor_params": self.anchor_params,
            "input_price": str(self.input_price),
            "output_price": str(self.output_price),
            "io_ratio": list(self.io_ratio),
        }

    @classmethod
    def from_dict(cls, d: dict) -> PriceAnchor:
        return cls(
            anchor_params=int(d["anchor_params"]),
            input_price=Decimal(str(d["input_price"])),
            output_price=Decimal(str(d["output_price"])),
            io_ratio=tuple(int(x) for x in d.get("io_ratio", (4, 1))),
        )


def anchor_price(anchor: PriceAnchor) -> Decimal:
    """Blended price per million total tokens at the anchor's I/O mix."""
    r_in, r_out = anchor.io_ratio
    return (r_in * anchor.input_price + r_out * anchor.output_price) / (r_in + r_out)


def _round_half_up(value: Decimal, places: int) -> Decimal:
    return value.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP)


def derive_price(params: int, anchor: PriceAnchor, places: int | None = 2) -> Decimal:
    """Price for a model of ``params`` parameters, rounded half-up.

    Scaling is linear in parameter count from the rounded anchor rate;
    the published schedule is quoted from the rounded anchor, so scaling
    the raw blend would drift off it (4B: 0.358/8 -> 0.04, not 0.05).
    ``places=None`` returns the exact unrounded derivation.
    """
    if params <= 0:
        raise DomainError(f"params must be positive, got {params}")
    base = _round_half_up(anchor_price(anchor), 2)
    exact = base * params / anchor.anchor_params
    return exact if places is None else _round_half_up(exact, places)


def derive_pool_prices(
    pool: list[AgentProfile] | list[dict],
    anchor: PriceAnchor,
    places: int = 2,
) -> dict[str, Decimal]:
    """Per-agent prices; an explicit price in the pool entry wins over derivation."""
    prices: dict[str, Decimal] = {}
    for entry in pool:
        if isinstance(entry, AgentProfile):
            agent_id, params, explicit = entry.id, entry.params, entry.price_per_mtok
        else:
            agent_id, params = entry["id"], int(entry["params"])
            raw = entry.get("price_per_mtok")
            explicit = Decimal(str(raw)) if raw is not None else None
        prices[agent_id] = explicit if explicit is not None else derive_price(params, anchor, places)
    return prices


def default_anchor() -> PriceAnchor:
    """32B-class anchor reproducing the published schedule.

    The published blend is 0.358/Mt at a 4:1 input/output mix, which pins
    the input rate at 0.30 (a 0.29 input would blend to 0.35 and derive a
    different ladder).
    """
    return PriceAnchor(
        anchor_params=32,
        input_price=Decimal("0.30"),
        output_price=Decimal("0.59"),
    )
