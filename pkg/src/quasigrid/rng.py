"""Deterministic counter-based random stream (splitmix64).

Every draw is pure 64-bit integer arithmetic, so a given seed yields the
same stream on every platform and Python build.  Raw 32-bit draws are
exposed as exact dyadic fractions in [0, 1) so downstream consumers never
touch floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    z = (x + _GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass
class RngState:
    """Seeded stream position; advancing mutates only the counter."""

    seed: int
    counter: int = 0

    def next_u64(self) -> int:
        value = _splitmix64((self.seed + self.counter * _GAMMA) & _MASK64)
        self.counter = (self.counter + 1) & _MASK64
        return value

    def next_u32(self) -> int:
        return self.next_u64() >> 32

    def unit(self) -> Fraction:
        """Uniform dyadic rational in [0, 1) with denominator 2**32."""
        return Fraction(self.next_u32(), 1 << 32)

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection, exact for any n >= 1."""
        if n < 1:
            raise ValueError("randrange needs n >= 1")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % n
