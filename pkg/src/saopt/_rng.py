"""Seeded stream derivation.

Every stochastic draw in a run comes from a Philox generator keyed by a tuple
of non-negative integers (master seed, repetition, purpose tag, ...), so the
stream used to evaluate one individual never depends on evaluation order or
worker count.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

MASK64 = (1 << 64) - 1

# purpose tags
WARM_GENOMES = 1
SIM = 2
OPERATORS = 3
FOREST = 4
HOLDOUT = 5

# roles inside one generation's simulator calls
ROLE_WARM = 0
ROLE_OFFSPRING = 1
ROLE_ELITE = 2
ROLE_HOLDOUT = 3


def _entropy(key: int | Iterable[int]) -> list[int]:
    if isinstance(key, (int, np.integer)):
        key = [int(key)]
    out = [int(k) for k in key]
    if any(k < 0 for k in out):
        raise ValueError(f"seed keys must be non-negative, got {out}")
    return out


def derive(*key: int) -> np.random.Generator:
    """Counter-based generator for the stream named by ``key``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(_entropy(key))))


def as_generator(rng: np.random.Generator | int | Iterable[int] | None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return derive(0)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(_entropy(rng))))


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step; returns (new_state, output). Mirrors the C kernel."""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def node_state(seed: int, node_id: int) -> int:
    return (seed ^ (((node_id + 1) * 0xD1B54A32D192ED03) & MASK64)) & MASK64
