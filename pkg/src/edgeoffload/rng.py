"""Deterministic 64-bit random source for the experiment harness.

SplitMix64 (Steele, Lea & Flood's splittable generator as popularized by
java.util.SplittableRandom): state advances by the golden-gamma constant
0x9E3779B97F4A7C15 and each output is a 64-bit finalizer mix of the state.
Pure integer arithmetic, so streams are bit-identical on every platform.

Sub-streams: ``stream.split(key)`` seeds a child generator with
``mix64(seed0 ^ mix64(key + GAMMA))`` where ``seed0`` is the stream's own
seed.  Children depend only on (seed, key path), never on how many draws the
parent has made, so adding draws in one place cannot shift any other stream.

Bounded draws use rejection sampling, so ``randint`` is exactly uniform.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    def __init__(self, seed: int):
        self._seed0 = seed & _MASK
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return _mix64(self._state)

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], inclusive."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        span = hi - lo + 1
        limit = ((1 << 64) // span) * span
        while True:
            u = self.next_u64()
            if u < limit:
                return lo + (u % span)

    def uniform(self, lo: float, hi: float) -> float:
        """Uniform float in [lo, hi) from the top 53 bits of one draw."""
        return lo + (hi - lo) * ((self.next_u64() >> 11) * 2.0**-53)

    def split(self, key: int) -> "SplitMix64":
        """Independent child stream addressed by ``key``."""
        return SplitMix64(_mix64(self._seed0 ^ _mix64((key + _GAMMA) & _MASK)))
