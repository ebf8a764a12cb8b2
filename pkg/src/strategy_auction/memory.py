"""Append-only auction memory with cosine retrieval and contrastive pairs.

Records are kept in auction order; retrieval is an exact scan (no
approximate index).  Appends are single-writer by contract: the engine
serializes them between auctions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels_py
from .domain import LOST, AuctionRecord, DomainError, dumps


class DuplicateTaskError(DomainError):
    pass


class DimensionMismatchError(DomainError):
    pass


class MixedEmbedderError(DomainError):
    pass


@dataclass(frozen=True)
class ContrastivePair:
    losing_strategy: str
    winning_strategy: str
    source_task_id: str
    owner: str


class MemoryBank:
    """Ordered store of auction records plus their task embeddings.

    ``max_records`` turns on a sliding window (oldest evicted first);
    the default keeps memory unbounded.
    """

    def __init__(self, embedder_tag: str, dim: int, max_records: int | None = None):
        if max_records is not None and max_records < 1:
            raise DomainError("max_records must be >= 1 when set")
        self.embedder_tag = embedder_tag
        self.dim = dim
        self.max_records = max_records
        self.records: list[AuctionRecord] = []
        self._by_task: dict[str, AuctionRecord] = {}
        self._vectors: list[np.ndarray] = []
        self._matrix: np.ndarray | None = None
        self._norms: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.records)

    @property
    def task_ids(self) -> list[str]:
        return [r.task_id for r in self.records]

    def append(self, record: AuctionRecord, embedding: np.ndarray) -> None:
        if record.task_id in self._by_task:
            raise DuplicateTaskError(f"task {record.task_id} already stored")
        vec = np.asarray(embedding, dtype=float)
        if vec.shape != (self.dim,):
            raise DimensionMismatchError(
                f"embedding shape {vec.shape} does not match bank dimension {self.dim}"
            )
        self.records.append(record)
        self._by_task[record.task_id] = record
        self._vectors.append(vec)
        if self.max_records is not None and len(self.records) > self.max_records:
            evicted = self.records.pop(0)
            del self._by_task[evicted.task_id]
            self._vectors.pop(0)
        self._matrix = None

    def _ensure_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        if self._matrix is None:
            self._matrix = np.ascontiguousarray(np.vstack(self._vectors))
            norms = np.sqrt((self._matrix * self._matrix).sum(axis=1))
            norms[norms == 0.0] = 1.0
            self._norms = norms
        return self._matrix, self._norms

    def similarities(self, query_embedding: np.ndarray) -> np.ndarray:
        """Cosine similarity of the query against every stored task."""
        query = np.asarray(query_embedding, dtype=float)
        if query.shape != (self.dim,):
            raise DimensionMismatchError(
                f"query shape {query.shape} does not match bank dimension {self.dim}"
            )
        if not self.records:
            return np.zeros(0)
        matrix, norms = self._ensure_matrix()
        qnorm = float(np.linalg.norm(query))
        if qnorm == 0.0:
            qnorm = 1.0
        # Pinned to the numpy kernel: retrieval ordering must not change
        # with the compiled extension's presence (last-ulp dot differences
        # would reorder near-tie candidates).
        return _kernels_py.dot_scores(matrix, query) / (norms * qnorm)

    def retrieve_top_k(self, query_embedding: np.ndarray, k: int) -> list[str]:
        """The min(k, size) most similar stored tasks, ties by insertion order."""
        if k < 1:
            raise DomainError("k must be >= 1")
        sims = self.similarities(query_embedding)
        n = sims.size
        if n == 0:
            return []
        take = min(k, n)
        order = np.lexsort((np.arange(n), -sims))
        return [self.records[int(i)].task_id for i in order[:take]]

    def record_for(self, task_id: str) -> AuctionRecord:
        try:
            return self._by_task[task_id]
        except KeyError:
            raise DomainError(f"task {task_id} not in bank") from None

    def build_pairs(self, retrieved: list[str], agent: str) -> list[ContrastivePair]:
        """One losing/winning pair per retrieved task the agent bid in.

        If the agent lost, the losing side is its own worst-net bid there;
        if it won, the losing side is the auction's worst-net loser.  Tasks
        where the agent did not bid yield no pair.
        """
        pairs: list[ContrastivePair] = []
        for task_id in retrieved:
            record = self.record_for(task_id)
            own = [b for b in record.all_bids() if b.agent_id == agent]
            if not own:
                continue
            winning = record.winning_bid
            if winning.agent_id == agent:
                losers = [b for b in record.all_bids() if record.outcome_label[b.key] == LOST]
                if not losers:
                    continue
                worst = max(losers, key=lambda b: (record.bid_nets[b.key], b.key))
                pairs.append(
                    ContrastivePair(
                        losing_strategy=worst.strategy_text,
                        winning_strategy=winning.strategy_text,
                        source_task_id=task_id,
                        owner=agent,
                    )
                )
            else:
                own_losing = [b for b in own if record.outcome_label[b.key] == LOST]
                if not own_losing:
                    continue
                worst_own = max(own_losing, key=lambda b: (record.bid_nets[b.key], b.key))
                pairs.append(
                    ContrastivePair(
                        losing_strategy=worst_own.strategy_text,
                        winning_strategy=winning.strategy_text,
                        source_task_id=task_id,
                        owner=agent,
                    )
                )
        return pairs

    # -- persistence -------------------------------------------------------

    def save(self, records_path: str | Path, embeddings_path: str | Path) -> None:
        records_path, embeddings_path = Path(records_path), Path(embeddings_path)
        with records_path.open("w", encoding="utf-8") as fh:
            for record in self.records:
                fh.write(dumps(record.to_dict()) + "\n")
        with embeddings_path.open("w", encoding="utf-8") as fh:
            fh.write(dumps({"embedder_tag": self.embedder_tag, "dim": self.dim}) + "\n")
            for vec in self._vectors:
                fh.write(dumps(vec.tolist()) + "\n")

    @classmethod
    def load(
        cls,
        records_path: str | Path,
        embeddings_path: str | Path,
        expected_tag: str | None = None,
    ) -> MemoryBank:
        records_path, embeddings_path = Path(records_path), Path(embeddings_path)
        with embeddings_path.open("r", encoding="utf-8") as fh:
            header = json.loads(fh.readline())
            vectors = [np.array(json.loads(line)) for line in fh if line.strip()]
        tag, dim = header["embedder_tag"], int(header["dim"])
        if expected_tag is not None and tag != expected_tag:
            raise MixedEmbedderError(
                f"bank was written with embedder {tag!r}, expected {expected_tag!r}"
            )
        bank = cls(embedder_tag=tag, dim=dim)
        with records_path.open("r", encoding="utf-8") as fh:
            records = [AuctionRecord.from_dict(json.loads(line)) for line in fh if line.strip()]
        if len(records) != len(vectors):
            raise DomainError(
                f"record/embedding count mismatch: {len(records)} vs {len(vectors)}"
            )
        for record, vec in zip(records, vectors):
            bank.append(record, vec)
        return bank
