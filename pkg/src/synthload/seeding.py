"""Stable per-entity RNG substreams.

Seeds are a 64-bit blake2b digest of the master seed and an entity key, so a
bus or facility gets the same random stream no matter which worker handles
it or in what order.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master_seed: int, *keys: object) -> int:
    token = ":".join([str(int(master_seed))] + [str(k) for k in keys]).encode()
    return int.from_bytes(hashlib.blake2b(token, digest_size=8).digest(), "little")


def substream(master_seed: int, *keys: object) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, *keys))
