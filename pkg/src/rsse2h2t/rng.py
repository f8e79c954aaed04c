"""Seeded random streams.

Every random quantity in the package is drawn from a stream named by an
integer key, so a run is fully determined by its master seed.  Keys are
derived with numpy's ``SeedSequence`` and streams use the PCG64 generator.
"""
from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1

# Stream identifiers used by the channel module.
STREAM_DATA_A = 1
STREAM_DATA_B = 2
STREAM_NOISE_A = 3
STREAM_NOISE_B = 4


def derive(seed: int, *ids: int) -> int:
    """64-bit key for the child stream ``ids`` of ``seed``."""
    entropy = [int(seed) & _MASK] + [int(i) & _MASK for i in ids]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def generator(key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(key) & _MASK))


def signs(key: int, n: int) -> np.ndarray:
    """``n`` equiprobable +-1 values (int8)."""
    bits = generator(key).integers(0, 2, size=n, dtype=np.int8)
    return (2 * bits - 1).astype(np.int8)


def gaussians(key: int, n: int) -> np.ndarray:
    """``n`` standard normal samples."""
    return generator(key).standard_normal(n)
