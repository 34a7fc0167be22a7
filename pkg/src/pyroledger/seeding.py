"""Deterministic per-replicate seed derivation.

Auditable accounting needs bit-reproducible simulation, so replicate
streams are derived counter-style: mix(master + index * gamma) with a
splitmix-style finalizer. Derivation is O(1) in the index, which makes
parallel and serial replicate execution produce identical streams.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(master: int, index: int) -> int:
    z = (master + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def replicate_rng(master: int, index: int) -> np.random.Generator:
    """Independent generator for one replicate of a master-seeded run."""
    return np.random.Generator(np.random.PCG64(derive_seed(master, index)))
