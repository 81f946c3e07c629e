"""Random streams.

Every stochastic operation takes an explicit seed or generator. Generators are
Philox based so independent streams can be split off for concurrent runs.

"""
from __future__ import annotations

import numpy as np


def make_rng(rng_seed=None):
    """Build a counter-based generator.

    Args:
        rng_seed (int | np.random.SeedSequence | np.random.Generator | None):
            seed material; an existing generator is returned unchanged so that
            callers can thread one stream through several operations

    Returns:
        np.random.Generator
    """
    if isinstance(rng_seed, np.random.Generator):
        return rng_seed
    if not isinstance(rng_seed, np.random.SeedSequence):
        rng_seed = np.random.SeedSequence(rng_seed)
    return np.random.Generator(np.random.Philox(rng_seed))


def spawn_seeds(rng_seed, n):
    """Split ``n`` independent seed sequences from one seed."""
    if isinstance(rng_seed, np.random.Generator):
        rng_seed = np.random.SeedSequence(int(rng_seed.integers(2**63)))
    elif not isinstance(rng_seed, np.random.SeedSequence):
        rng_seed = np.random.SeedSequence(rng_seed)
    return rng_seed.spawn(n)
