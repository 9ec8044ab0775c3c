"""Deterministic stream seeding.

Every stochastic task owns an :class:`RngStream` identified by
``(seed, stream)``.  The same pair always reproduces the same trajectory;
distinct pairs give statistically independent streams.  Kernel-side
randomness is xoshiro256** seeded through splitmix64, so the state
derivation is a pure function of the pair and is stable across runs,
processes, and machines.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> tuple[int, int]:
    x = (x + _GOLDEN) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x, (z ^ (z >> 31)) & _MASK64


def stable_hash64(*parts: object) -> int:
    """64-bit content hash of a tuple of printable parts (order matters)."""
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(repr(part).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class RngStream:
    """A reproducible, independent random stream."""

    seed: int
    stream: int = 0

    def child(self, *tags: object) -> "RngStream":
        """Derive an independent substream keyed by the given tags."""
        return RngStream(self.seed, stable_hash64(self.stream, *tags))

    def state(self) -> np.ndarray:
        """xoshiro256** state vector (4 x uint64) for the numba kernels."""
        x = stable_hash64(self.seed, self.stream)
        out = np.empty(4, dtype=np.uint64)
        for i in range(4):
            x, v = _splitmix64(x)
            out[i] = v
        # xoshiro forbids the all-zero state; astronomically unlikely, but cheap.
        if not out.any():
            out[0] = np.uint64(1)
        return out

    def generator(self) -> np.random.Generator:
        """numpy Generator on the same (seed, stream) identity."""
        return np.random.default_rng(stable_hash64(self.seed, self.stream, "np"))
