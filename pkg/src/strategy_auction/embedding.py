"""Text embedders for task-similarity retrieval.

The built-in default is a seeded signed feature-hashing embedder:
deterministic across processes and machines, no model downloads.  Remote
sentence-embedding services plug in through the same interface.
"""

from __future__ import annotations

import hashlib
import re
from typing import Callable, Protocol

import numpy as np

from .domain import DomainError

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class Embedder(Protocol):
    tag: str
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


class HashingEmbedder:
    """Signed token-count hashing with L2 normalization."""

    def __init__(self, dim: int = 256, seed: int = 0):
        if dim < 2:
            raise DomainError("embedding dimension must be >= 2")
        self.dim = dim
        self.seed = seed
        self.tag = f"hash-v1-d{dim}-s{seed}"

    def embed(self, text: str) -> np.ndarray:
        if not text:
            raise DomainError("cannot embed empty text")
        vec = np.zeros(self.dim)
        for token in _TOKEN_RE.findall(text.lower()):
            digest = hashlib.sha256(f"{self.seed}:{token}".encode()).digest()
            idx = int.from_bytes(digest[:8], "big") % self.dim
            sign = 1.0 if digest[8] & 1 else -1.0
            vec[idx] += sign
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            # All tokens cancelled or no tokens survived: fall back to a
            # deterministic unit vector so cosine stays well-defined.
            vec[0] = 1.0
            return vec
        return vec / norm


_REGISTRY: dict[str, Callable[..., Embedder]] = {"hash": HashingEmbedder}


def register_embedder(name: str, factory: Callable[..., Embedder]) -> None:
    _REGISTRY[name] = factory


def make_embedder(name: str = "hash", **kwargs) -> Embedder:
    if name not in _REGISTRY:
        raise DomainError(f"unknown embedder {name!r}; registered: {sorted(_REGISTRY)}")
    return _REGISTRY[name](**kwargs)
