"""Deterministic random streams.

Every random draw in the package is taken from a ``numpy.random.Generator``
backed by PCG64 and seeded through ``numpy.random.SeedSequence``. Child
streams are addressed by an integer key tuple appended to the master seed as
a SeedSequence ``spawn_key``, so stream ``(seed, 3)`` is the same no matter
how many other streams were created before it.
"""

from __future__ import annotations

import numpy as np

BIT_GENERATOR = "PCG64"

# Multi-element keys never collide with the single-element surrogate keys.
CALIBRATION_KEY = (1, 0)
JITTER_KEY = (2, 0)
SUBJECT_KEY = 3


def _check_seed(seed) -> int:
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def seed_sequence(seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=_check_seed(seed), spawn_key=tuple(int(k) for k in key))


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator for the stream addressed by ``(seed, *key)``."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *key)))


def derive_seed(seed: int, *key: int) -> int:
    """64-bit child seed for the stream addressed by ``(seed, *key)``."""
    state = seed_sequence(seed, *key).generate_state(1, dtype=np.uint64)
    return int(state[0])


def generator_info() -> dict:
    """Version pin written into reports so replays can check compatibility."""
    return {
        "bit_generator": BIT_GENERATOR,
        "seeding": "numpy.random.SeedSequence(entropy=seed, spawn_key=key)",
        "numpy": np.__version__,
    }
