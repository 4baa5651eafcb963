"""Seeded, splittable random streams.

Every sampler in the package takes an explicit :class:`RngStream`. Child
streams are derived by mixing ``(seed, label, index)`` through splitmix64,
so independent tasks can be seeded without coordination and reproduce
exactly for a given master seed.
"""

from __future__ import annotations

import numpy as np

DEFAULT_SEED = 0x5EED_0F_9A12

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One round of the splitmix64 finalizer on a 64-bit integer."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def _fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


def derive_seed(seed: int, label: str = "", index: int = 0) -> int:
    """Mix a master seed, a task label and a stream index into a 64-bit seed."""
    h = splitmix64(seed & _MASK64)
    h = splitmix64(h ^ _fnv1a64(label))
    return splitmix64(h ^ (index & _MASK64))


class RngStream:
    """Deterministic random stream backed by a PCG64 bit generator.

    Parameters
    ----------
    seed : int
        64-bit unsigned seed. Two streams built from the same seed produce
        identical draws.
    """

    def __init__(self, seed: int = DEFAULT_SEED):
        if seed < 0 or seed > _MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.generator = np.random.Generator(np.random.PCG64(seed))

    def child(self, label: str, index: int = 0) -> "RngStream":
        """Independent stream for task ``label``; does not consume draws from self."""
        return RngStream(derive_seed(self.seed, label, index))

    def normal(self, size=None):
        return self.generator.standard_normal(size)

    def uniform(self, size=None):
        return self.generator.random(size)

    def __repr__(self):
        return f"RngStream(seed={self.seed:#x})"
