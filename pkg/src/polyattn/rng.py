"""Portable seedable random numbers.

SplitMix64 is used in counter mode: draw ``i`` of stream ``seed`` is
``mix(seed + (i + 1) * GOLDEN)``.  Any language with 64-bit wrapping
integers reproduces the exact same doubles, which is what the CLI needs for
cross-platform bit reproducibility.
"""
import numpy as np

ALGORITHM = "splitmix64-counter/v1"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    """Stateful wrapper around the counter-mode stream.

    >>> SplitMix64(0).uint64(2).tolist()
    [16294208416658607535, 7960286522194355700]
    """

    def __init__(self, seed=0):
        self.seed = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)
        self.counter = 0

    def uint64(self, size):
        idx = np.arange(self.counter + 1, self.counter + 1 + size, dtype=np.uint64)
        self.counter += size
        with np.errstate(over="ignore"):
            return _mix(self.seed + idx * _GOLDEN)

    def random(self, size):
        """Doubles in [0, 1) built from the top 53 bits."""
        return (self.uint64(size) >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)

    def uniform(self, low, high, shape):
        size = int(np.prod(shape)) if shape else 1
        return (low + (high - low) * self.random(size)).reshape(shape)

    def integers(self, low, high, size):
        """Integers in [low, high) by multiply-shift on the top 53 bits."""
        span = high - low
        return low + np.floor(self.random(size) * span).astype(np.int64)

    def permutation(self, n):
        keys = self.random(n)
        return np.argsort(keys, kind="stable")

    def metadata(self):
        return {"rng": ALGORITHM, "seed": int(self.seed)}
