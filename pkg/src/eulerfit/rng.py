"""Deterministic pseudo-random numbers: xorshift64* uniforms, Box-Muller normals.

Every stochastic choice in the package (weight initialization, measurement
noise) goes through this generator, so a run is bit-reproducible from its
seed alone, with no dependence on library sampler internals.

The stream is the xorshift64* recurrence on a 64-bit state s (all arithmetic
mod 2**64):

    s ^= s >> 12;  s ^= s << 25;  s ^= s >> 27;  output = s * 0x2545F4914F6CDD1D

The user seed is scrambled once through splitmix64 so that small consecutive
seeds (0, 1, 2, ...) still start from well-mixed, nonzero states.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_STAR = 0x2545F4914F6CDD1D
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


class Rng:
    """Seeded xorshift64* stream with uniform and standard-normal draws."""

    def __init__(self, seed: int):
        state = _splitmix64(int(seed) & _MASK64)
        # xorshift requires a nonzero state; one seed maps to 0 under splitmix64
        self._state = state if state != 0 else _GOLDEN
        self._spare: float | None = None

    def next_u64(self) -> int:
        s = self._state
        s ^= s >> 12
        s = (s ^ (s << 25)) & _MASK64
        s ^= s >> 27
        self._state = s
        return (s * _STAR) & _MASK64

    def uniform(self) -> float:
        """Uniform double in (0, 1] from the top 53 bits (log-safe for Box-Muller)."""
        return ((self.next_u64() >> 11) + 1) * 2.0 ** -53

    def uniform_in(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.uniform()

    def normal(self) -> float:
        """Standard normal via the Box-Muller transform; the sine mate is cached."""
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        u1 = self.uniform()
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        self._spare = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)

    def normals(self, n: int) -> list[float]:
        return [self.normal() for _ in range(n)]
