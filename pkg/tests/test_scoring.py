from __future__ import annotations

import random

import pytest

from strategy_auction.domain import ScoringWeights
from strategy_auction.scoring import (
    FeatureRow,
    MissingJudgeScoreError,
    cost,
    net,
    net_coefficients,
    unit_weight_bound,
    value,
)


def row(agent="a", price=0.36, tokens=100, entropy=0.5, scores=None):
    return FeatureRow(
        agent_id=agent,
        price=price,
        token_count=tokens,
        entropy=entropy,
        jury_scores=scores if scores is not None else {"a": 3},
    )


def weights(w_c=1.0, w_h=0.0, w_judge=None, mask=()):
    return ScoringWeights(
        w_c=w_c, w_h=w_h, w_judge=w_judge or {}, ablation_mask=frozenset(mask)
    )


def test_cost_zero_weight_annihilates():
    assert cost(row(), weights(w_c=0.0)) == 0.0


def test_cost_direct_product():
    assert cost(row(price=0.36, tokens=100), weights(w_c=1.0)) == pytest.approx(36.0)


def test_cost_ratio_follows_price_ratio():
    cheap = cost(row(price=0.05, tokens=120), weights(w_c=2.5))
    pricey = cost(row(price=0.36, tokens=120), weights(w_c=2.5))
    assert pricey / cheap == pytest.approx(36 / 5)


def test_value_zero_weights():
    assert value(row(), weights(w_h=0.0, w_judge={"a": 0.0})) == 0.0


def test_value_linear_form():
    r = row(entropy=0.5, scores={"j": 3})
    w = weights(w_h=1.0, w_judge={"j": 2.0})
    assert value(r, w) == pytest.approx(6.5)


def test_value_full_jury_sum():
    r = row(scores={f"j{i}": 5 for i in range(4)})
    w = weights(w_h=0.0, w_judge={f"j{i}": 1.0 for i in range(4)})
    assert value(r, w) == pytest.approx(20.0)


def test_net_subtraction_contract():
    r = row(price=0.36, tokens=100, entropy=0.5, scores={"j": 3})
    w = weights(w_c=1.0, w_h=1.0, w_judge={"j": 2.0})
    cv = net(r, w)
    assert cv.cost == pytest.approx(36.0)
    assert cv.value == pytest.approx(6.5)
    assert cv.net == pytest.approx(29.5)


def test_net_all_zero_weights():
    r = row(scores={"j": 4})
    assert net(r, weights(w_c=0.0, w_h=0.0, w_judge={"j": 0.0})).net == 0.0


def test_ranking_matches_independent_recomputation():
    rng = random.Random(3)
    judges = ["a", "b", "c", "d"]
    w = ScoringWeights(w_c=0.7, w_h=1.3, w_judge={j: 0.2 + 0.1 * i for i, j in enumerate(judges)})
    rows = [
        FeatureRow(
            agent_id=j,
            price=rng.choice([0.05, 0.09, 0.16, 0.36]),
            token_count=rng.randint(50, 150),
            entropy=rng.random(),
            jury_scores={k: rng.randint(0, 5) for k in judges},
        )
        for j in judges
    ]
    nets = [net(r, w).net for r in rows]
    # Independent spreadsheet-style recomputation.
    expected = []
    for r in rows:
        c = 0.7 * r.price * r.token_count
        v = 1.3 * r.entropy + sum(w.w_judge[k] * r.jury_scores[k] for k in judges)
        expected.append(c - v)
    assert nets == pytest.approx(expected)
    assert sorted(range(4), key=lambda i: nets[i]) == sorted(range(4), key=lambda i: expected[i])


def test_missing_judge_score_names_judge():
    r = row(scores={"a": 3})
    w = weights(w_h=0.0, w_judge={"a": 1.0, "missing_judge": 1.0})
    with pytest.raises(MissingJudgeScoreError, match="missing_judge"):
        value(r, w)


def test_price_and_length_ablations():
    r = row(price=0.36, tokens=100)
    assert cost(r, weights(w_c=2.0, mask=("price",))) == pytest.approx(200.0)
    assert cost(r, weights(w_c=2.0, mask=("length",))) == pytest.approx(0.72)
    assert cost(r, weights(w_c=2.0, mask=("price", "length"))) == pytest.approx(2.0)


def test_entropy_and_jury_ablations():
    r = row(entropy=0.8, scores={"j": 5})
    w = weights(w_h=2.0, w_judge={"j": 1.0}, mask=("entropy",))
    assert value(r, w) == pytest.approx(5.0)
    w = weights(w_h=2.0, w_judge={"j": 1.0}, mask=("jury",))
    assert value(r, w) == pytest.approx(1.6)


def test_self_judgment_ablation_drops_own_score():
    r = row(agent="a", entropy=0.0, scores={"a": 5, "b": 2})
    w = weights(w_h=0.0, w_judge={"a": 1.0, "b": 1.0}, mask=("self_judgment",))
    assert value(r, w) == pytest.approx(2.0)


def test_affinity_in_weights():
    r = row(price=0.16, tokens=80, entropy=0.4, scores={"j": 4})
    w1 = ScoringWeights(w_c=0.3, w_h=0.5, w_judge={"j": 0.2})
    w2 = ScoringWeights(w_c=0.6, w_h=1.0, w_judge={"j": 0.4})
    assert net(r, w2).net == pytest.approx(2 * net(r, w1).net)


def test_argmin_invariant_under_positive_scaling():
    rng = random.Random(17)
    judges = ["p", "q"]
    for _ in range(50):
        rows = [
            FeatureRow(
                agent_id=f"a{i}",
                price=rng.uniform(0.05, 0.4),
                token_count=rng.randint(40, 150),
                entropy=rng.random(),
                jury_scores={k: rng.randint(0, 5) for k in judges},
            )
            for i in range(4)
        ]
        w = ScoringWeights(
            w_c=rng.uniform(-1, 1), w_h=rng.uniform(-1, 1),
            w_judge={k: rng.uniform(-1, 1) for k in judges},
        )
        scale = rng.uniform(0.1, 10.0)
        scaled = ScoringWeights(
            w_c=scale * w.w_c, w_h=scale * w.w_h,
            w_judge={k: scale * v for k, v in w.w_judge.items()},
        )
        base_pick = min(range(4), key=lambda i: net(rows[i], w).net)
        scaled_pick = min(range(4), key=lambda i: net(rows[i], scaled).net)
        assert base_pick == scaled_pick


def test_no_normalization_in_scoring_path():
    # Pre-scaling the raw features must change the nets: any internal
    # normalization would hide the rescaling.
    w = ScoringWeights(w_c=0.5, w_h=0.5, w_judge={"j": 0.5})
    raw = FeatureRow("a", price=0.2, token_count=50, entropy=0.4, jury_scores={"j": 2})
    scaled = FeatureRow("a", price=2.0, token_count=500, entropy=0.4, jury_scores={"j": 2})
    assert net(raw, w).net != net(scaled, w).net


def test_net_coefficients_match_net():
    r = row(agent="a", price=0.09, tokens=70, entropy=0.3, scores={"a": 2, "b": 4})
    w = ScoringWeights(w_c=0.2, w_h=-0.4, w_judge={"a": 0.5, "b": -0.1})
    a_c, a_h, a_j = net_coefficients(r, ["a", "b"])
    rebuilt = w.w_c * a_c + w.w_h * a_h + sum(
        wj * aj for wj, aj in zip([w.w_judge["a"], w.w_judge["b"]], a_j)
    )
    assert rebuilt == pytest.approx(net(r, w).net)


def test_unit_weight_bound():
    r = row(price=0.36, tokens=100, entropy=0.5, scores={"a": 3, "b": 5})
    assert unit_weight_bound(r, ["a", "b"]) == pytest.approx(36 + 0.5 + 8)


def test_feature_row_round_trip():
    r = row(agent="a", price=0.16, tokens=88, entropy=0.31, scores={"a": 2, "b": 5})
    assert FeatureRow.from_dict(r.to_dict()) == r
