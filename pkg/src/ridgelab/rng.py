"""Deterministic substream derivation for replicated simulations.

Every replicate gets its own generator derived from (master_seed, path...),
so replicate-level results are bitwise reproducible regardless of how many
workers run them or in which order.
"""

from __future__ import annotations

import numpy as np


def rng_for(seed: int, *path: int) -> np.random.Generator:
    """Return a generator for the substream identified by (seed, *path)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, path)]))


def derive_seed(seed: int, *path: int) -> int:
    """Collapse (seed, path...) into a single child seed integer."""
    return int(np.random.SeedSequence([int(seed), *map(int, path)]).generate_state(1)[0])


def as_rng(seed_or_rng) -> np.random.Generator:
    """Accept either an integer seed or a ready Generator."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return rng_for(int(seed_or_rng))
