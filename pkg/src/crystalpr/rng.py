"""Seeded, splittable random streams for reproducible experiments.

Every randomized routine takes an integer seed and derives independent
substreams as PCG64 generators keyed by (seed, *path) through numpy's
SeedSequence.  Results are therefore bit-identical for any thread count or
execution order, and the identifier written into experiment metadata pins the
algorithm.
"""

from __future__ import annotations

import numpy as np

RNG_NAME = "numpy:PCG64:seedseq"


def substream(seed: int, *path: int) -> np.random.Generator:
    """Generator for the substream keyed by (seed, *path)."""
    entropy = (int(seed),) + tuple(int(p) for p in path)
    return np.random.default_rng(np.random.SeedSequence(entropy))


def rng_id(seed: int, *path: int) -> str:
    entropy = ",".join(str(int(p)) for p in (seed,) + path)
    return f"{RNG_NAME}({entropy})"
