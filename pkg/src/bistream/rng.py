"""Seedable, splittable randomness.

Generator: numpy's PCG64 (PCG XSL RR 128/64, period 2**128), seeded through
``numpy.random.SeedSequence(seed)``.  Both are specified bit-for-bit by numpy
and give identical streams on every platform.

Substreams: ``derive(master, label)`` seeds a new generator with the first
8 bytes (big-endian) of ``blake2b(f"{master}:{label}", digest_size=8)``, so
each label's stream depends only on the master seed and the label itself.
"""
from __future__ import annotations

import hashlib
import secrets

import numpy as np

from .errors import InvalidRange

MASK64 = (1 << 64) - 1


class Rng:
    """Thin wrapper over a PCG64 generator exposing the draws the engines use."""

    __slots__ = ("seed", "_gen")

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed})"

    def next_unit(self) -> float:
        """Uniform draw on [0, 1)."""
        return float(self._gen.random())

    def next_index(self, n: int) -> int:
        """Uniform integer on [0, n), unbiased (numpy uses Lemire's rejection method)."""
        if n < 1:
            raise InvalidRange(f"next_index needs n >= 1, got {n}")
        if n == 1:
            return 0
        return int(self._gen.integers(n))

    def next_lambda(self) -> float:
        """Uniform draw on (0, 1); an exact 0 is redrawn."""
        while True:
            x = float(self._gen.random())
            if x > 0.0:
                return x

    def next_int_range(self, lo: int, hi: int) -> int:
        """Uniform integer on [lo, hi] inclusive."""
        if hi < lo:
            raise InvalidRange(f"empty range [{lo}, {hi}]")
        return lo + self.next_index(hi - lo + 1)


def new_rng(seed: int) -> Rng:
    return Rng(seed)


def derive_seed(master_seed: int, label: str) -> int:
    digest = hashlib.blake2b(f"{int(master_seed) & MASK64}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def derive(master_seed: int, label: str) -> Rng:
    return Rng(derive_seed(master_seed, label))


def entropy_seed() -> int:
    """Fresh 64-bit seed from system entropy, for runs without ``--seed``."""
    return secrets.randbits(64)
