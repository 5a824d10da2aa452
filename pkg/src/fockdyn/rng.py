"""SplitMix64: state += 0x9E3779B97F4A7C15, then the output is mixed with
multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB (shifts 30, 27, 31).

Bit-reproducible on every platform, which is the only reason it is used instead
of numpy's generators.
"""
import math

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform on [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def sign(self) -> int:
        return 1 if self.next_u64() >> 63 else -1

    def normal(self) -> float:
        # Box-Muller; 1 - u keeps the log argument in (0, 1]
        u1, u2 = 1.0 - self.uniform(), self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2 * math.pi * u2)

    def complex_normal(self) -> complex:
        return complex(self.normal(), self.normal()) / math.sqrt(2)

    def in_disc(self, radius: float) -> complex:
        r = radius * math.sqrt(self.uniform())
        t = 2 * math.pi * self.uniform()
        return complex(r * math.cos(t), r * math.sin(t))

    def integer(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi]."""
        return lo + self.next_u64() % (hi - lo + 1)

    def spawn(self, index: int) -> "SplitMix64":
        """Independent child stream, a pure function of (current state, index)."""
        child = SplitMix64(self.state ^ ((index + 1) * GOLDEN & MASK))
        child.next_u64()
        return child
