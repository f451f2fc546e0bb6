"""Seed derivation: every random stream is a pure function of the run seed.

A stream is named by the user seed plus a tuple of tags (experiment name,
distance index, trial index, ...). The tags are hashed with BLAKE2b, so a
stream never depends on how work is split across workers.
"""
from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def derive_seed(seed: int, *tags) -> int:
    """64-bit child seed for ``(seed, *tags)``."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(seed) & MASK64).encode())
    for tag in tags:
        h.update(b"\x1f")
        h.update(str(tag).encode())
    return int.from_bytes(h.digest(), "little")


def unit_uniform(seed: int, *tags) -> float:
    """A single uniform draw in [0, 1) from the named stream."""
    return (derive_seed(seed, *tags) >> 11) * 2.0 ** -53


def generator(seed: int, *tags) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(seed, *tags)))
