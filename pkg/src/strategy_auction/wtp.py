"""Willingness-to-pay k-NN router baseline.

Neighbors come from cosine similarity over task embeddings; among them
each agent's mean observed quality and cost are traded off linearly by
the willingness-to-pay scalar.  The linear form follows the source
router construction; the tie goes to the cheaper agent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels_py
from .domain import DomainError

DEFAULT_K = 50
DEFAULT_WTP = 5.0


@dataclass(frozen=True)
class TrainingPoint:
    embedding: np.ndarray
    quality: dict[str, float]  # agent -> observed quality in [0, 1]
    cost: dict[str, float]  # agent -> observed cost

    def __post_init__(self):
        for agent, q in self.quality.items():
            if not 0.0 <= q <= 1.0:
                raise DomainError(f"quality for {agent} outside [0, 1]: {q}")


class WtpModel:
    def __init__(
        self,
        points: list[TrainingPoint],
        prices: dict[str, float],
        k: int = DEFAULT_K,
        wtp: float = DEFAULT_WTP,
    ):
        if not points:
            raise DomainError("WTP model needs at least one training point")
        if k < 1:
            raise DomainError("k must be >= 1")
        self.points = points
        self.prices = prices
        self.k = k
        self.wtp = wtp
        self.agents = sorted(points[0].quality)
        for point in points:
            if sorted(point.quality) != self.agents or sorted(point.cost) != self.agents:
                raise DomainError("training points disagree on the agent set")
        self.dim = points[0].embedding.shape[0]
        matrix = np.ascontiguousarray(np.vstack([p.embedding for p in points]).astype(float))
        norms = np.sqrt((matrix * matrix).sum(axis=1))
        norms[norms == 0.0] = 1.0
        self._matrix = matrix
        self._norms = norms

    def neighbors(self, query_embedding: np.ndarray) -> list[int]:
        query = np.asarray(query_embedding, dtype=float)
        if query.shape != (self.dim,):
            raise DomainError(
                f"query dimension {query.shape} does not match model dimension {self.dim}"
            )
        qnorm = float(np.linalg.norm(query))
        if qnorm == 0.0:
            qnorm = 1.0
        # Same pinned kernel as the memory bank, for backend-stable ranking.
        sims = _kernels_py.dot_scores(self._matrix, query) / (self._norms * qnorm)
        take = min(self.k, len(self.points))
        order = np.lexsort((np.arange(sims.size), -sims))
        return [int(i) for i in order[:take]]

    def route(self, query_embedding: np.ndarray) -> str:
        idx = self.neighbors(query_embedding)
        best_agent = None
        best_key = None
        for agent in self.agents:
            q_hat = sum(self.points[i].quality[agent] for i in idx) / len(idx)
            c_hat = sum(self.points[i].cost[agent] for i in idx) / len(idx)
            score = self.wtp * q_hat - c_hat
            key = (-score, self.prices.get(agent, c_hat), agent)
            if best_key is None or key < best_key:
                best_key, best_agent = key, agent
        return best_agent


def wtp_route(model: WtpModel, query_embedding: np.ndarray) -> str:
    return model.route(query_embedding)
