from __future__ import annotations

from decimal import Decimal
from pathlib import Path

import pytest

from strategy_auction.domain import AgentProfile, ScoringWeights, Task, TaskDomain

REPO_ROOT = Path(__file__).resolve().parent.parent
SCENARIO_DIR = REPO_ROOT / "scenarios" / "ladder"
DATA_DIR = Path(__file__).resolve().parent / "data"


@pytest.fixture(scope="session")
def scenario_path() -> Path:
    return SCENARIO_DIR / "scenario.json"


@pytest.fixture
def ladder_profiles() -> list[AgentProfile]:
    return [
        AgentProfile(id="a4b", params=4, price_per_mtok=Decimal("0.05")),
        AgentProfile(id="a8b", params=8, price_per_mtok=Decimal("0.09")),
        AgentProfile(id="a14b", params=14, price_per_mtok=Decimal("0.16")),
        AgentProfile(id="a32b", params=32, price_per_mtok=Decimal("0.36")),
    ]


@pytest.fixture
def flat_weights() -> ScoringWeights:
    return ScoringWeights(
        w_c=0.004,
        w_h=0.5,
        w_judge={"a4b": 0.08, "a8b": 0.08, "a14b": 0.08, "a32b": 0.08},
    )


def make_task(task_id: str = "t0", tau: float | None = 0.3, prompt: str = "find the figure") -> Task:
    return Task(id=task_id, domain=TaskDomain.DEEP_SEARCH, prompt=prompt, tau_minutes=tau)
