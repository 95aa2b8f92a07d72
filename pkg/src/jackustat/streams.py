"""Deterministic, order-independent random streams.

Randomness attached to a subsample is keyed by the subsample's original
index tuple rather than by the order in which subsamples are visited, so
partitioning work across threads, or deleting observations for a jackknife
replicate, never reshuffles it.
"""

from __future__ import annotations

import zlib
from collections.abc import Sequence

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _splitmix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def keyed_uniform(seed: int, tuples: np.ndarray) -> np.ndarray:
    """Uniform [0, 1) draw per row of ``tuples``, a pure function of ``(seed, row)``."""
    tuples = np.atleast_2d(np.asarray(tuples, dtype=np.uint64))
    with np.errstate(over="ignore"):
        h = np.full(tuples.shape[0], np.uint64(seed & 0xFFFFFFFFFFFFFFFF), dtype=np.uint64)
        h = _splitmix(h + _GOLDEN)
        for col in tuples.T:
            h = _splitmix(h ^ (col + _GOLDEN))
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def tuple_rng(seed: int, key: Sequence[int]) -> np.random.Generator:
    """Generator for the substream keyed by ``(seed, *key)``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, key)]))


def tag(name: str) -> int:
    """Stable integer tag for a string (used to separate experiment streams)."""
    return zlib.crc32(name.encode("utf-8"))


def replicate_seed(master: int, *key: int) -> np.random.SeedSequence:
    """Seed sequence for one replicate; a pure function of ``(master, *key)``."""
    return np.random.SeedSequence([int(master), *map(int, key)])
