"""Counter-derived random substreams.

Every random draw in a run is addressed by a path of integers under the
run seed (``(0, step, 0, block)`` for attachment trials, and so on). A
substream is a fresh PCG64 seeded by ``SeedSequence(seed, spawn_key=path)``,
so results never depend on how work is scheduled across threads.
"""

from __future__ import annotations

import os

import numpy as np

SeedLike = "int | np.random.SeedSequence"


def as_seedseq(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed))


def child(seed, *key: int) -> np.random.SeedSequence:
    ss = as_seedseq(seed)
    return np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + tuple(int(k) for k in key))


def generator(seed, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(child(seed, *key)))


def default_threads() -> int:
    """Thread hint from ``HYPDLA_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("HYPDLA_THREADS", "1")))
    except ValueError:
        return 1
