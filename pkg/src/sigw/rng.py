"""Seeding and stream-splitting conventions.

All randomness in the package flows through numpy's PCG64 via
``np.random.default_rng``, seeded from an explicit 64-bit integer.  Derived
streams (one per repetition index, or one per unordered pair in a pairwise
computation) come from ``SeedSequence(seed, spawn_key=path)``, so parallel or
reordered execution cannot change results: the stream is a pure function of
(seed, path).
"""

import numpy as np


def generator(seed: int) -> np.random.Generator:
    """Root generator for the given seed."""
    return np.random.default_rng(np.random.SeedSequence(seed))


def child_generator(seed: int, *path: int) -> np.random.Generator:
    """Generator for the child stream identified by ``path`` (e.g. a
    repetition index, or an (i, j) pair)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=path))


def child_seed(seed: int, *path: int) -> int:
    """A 64-bit integer seed for the child stream, for interfaces that
    persist the seed they were given (direction sets)."""
    ss = np.random.SeedSequence(seed, spawn_key=path)
    return int(ss.generate_state(1, dtype=np.uint64)[0])
