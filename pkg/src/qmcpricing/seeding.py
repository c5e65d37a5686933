"""Deterministic derivation of independent random streams.

Every sweep cell and trial gets its own generator keyed by
``(master seed, *keys)``, so results never depend on execution order.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def child_seed(rng: np.random.Generator) -> int:
    """Draw a 63-bit seed from ``rng`` for a nested stream family."""
    return int(rng.integers(0, 2**63 - 1))
