"""Deterministic seed derivation.

All randomness in the pipeline flows from explicit seeds through these
helpers.  Sub-seeds are derived by hashing the parent seed with a label
path, so components stay independently reproducible across processes
and machines (the built-in ``hash`` is salted per process and never used).
"""

from __future__ import annotations

import hashlib
import random


def derive_seed(*parts: object) -> int:
    """64-bit sub-seed from a label path."""
    label = ":".join(str(p) for p in parts)
    digest = hashlib.sha256(label.encode()).digest()
    return int.from_bytes(digest[:8], "big")


def rng_for(*parts: object) -> random.Random:
    return random.Random(derive_seed(*parts))


def unit(*parts: object) -> float:
    """Deterministic draw in [0, 1) keyed purely by the label path."""
    return derive_seed(*parts) / 2.0**64
