"""Deterministic per-item random streams.

Every stochastic step derives its seed from (master_seed, item_id) via
SHA-256, so results are independent of iteration order and parallelism:
re-running any subset of items reproduces exactly the same draws.
"""

from __future__ import annotations

import hashlib

import numpy as np


def seed_for(master_seed: int, item_id: str) -> int:
    """Stable 64-bit seed for one named item under a master seed."""
    digest = hashlib.sha256(f"{master_seed}:{item_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def rng_for(master_seed: int, item_id: str) -> np.random.Generator:
    """PCG64 generator seeded from (master_seed, item_id)."""
    return np.random.default_rng(seed_for(master_seed, item_id))
