"""Deterministic random source for scenario generation.

SplitMix64 with the standard constants (increment 0x9E3779B97F4A7C15,
mix multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB).  The
generator is trivial to port, so a seed written into a config file
reproduces the same scenario bytes anywhere.
"""

import math

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """64-bit SplitMix64 stream seeded with an integer."""

    def __init__(self, seed):
        self._state = int(seed) & _MASK64
        self._spare_normal = None

    def next_u64(self):
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def random(self):
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def uniform(self, low, high):
        return low + (high - low) * self.random()

    def randint(self, low, high):
        """Integer in [low, high] inclusive."""
        if high < low:
            raise ValueError(f"empty range [{low}, {high}]")
        span = high - low + 1
        return low + int(self.random() * span)

    def normal(self, mean=0.0, std=1.0):
        """Gaussian deviate via Box-Muller; the spare is cached."""
        if self._spare_normal is not None:
            z = self._spare_normal
            self._spare_normal = None
            return mean + std * z
        u1 = 1.0 - self.random()  # (0, 1], keeps log finite
        u2 = self.random()
        r = math.sqrt(-2.0 * math.log(u1))
        z0 = r * math.cos(2.0 * math.pi * u2)
        self._spare_normal = r * math.sin(2.0 * math.pi * u2)
        return mean + std * z0
