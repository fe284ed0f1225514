"""Portable SplitMix64 generator.

The state advances by the golden-ratio increment ``0x9E3779B97F4A7C15`` and each
output is the standard SplitMix64 finalizer of the new state::

    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9   (mod 2**64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB   (mod 2**64)
    out = z ^ (z >> 31)

Sub-streams are keyed by :func:`derive_seed`, which folds each integer tag into
the seed with one finalizer call, so that stream ``(seed, b)`` is independent of
how many other streams were created before it.
"""

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1
DEFAULT_SEED = 20240917

_GAMMA = np.uint64(GAMMA)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z):
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return z ^ (z >> 31)


def derive_seed(seed, *tags):
    state = int(seed) & MASK64
    for tag in tags:
        state = _mix((state + GAMMA * (int(tag) + 1)) & MASK64)
    return state


class SplitMix64:
    def __init__(self, seed, *tags):
        self.state = derive_seed(seed, *tags)

    def next_u64(self, size):
        """Return the next ``size`` outputs as a uint64 array."""
        steps = np.arange(1, size + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * _GAMMA
            z = (z ^ (z >> np.uint64(30))) * _M1
            z = (z ^ (z >> np.uint64(27))) * _M2
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + GAMMA * size) & MASK64
        return z

    def uniform(self, size):
        """Doubles in [0, 1) built from the top 53 bits."""
        return (self.next_u64(size) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def integers(self, low, high, size=None):
        """Uniform integers in the closed range ``[low, high]``."""
        n = 1 if size is None else size
        span = high - low + 1
        out = low + np.minimum(np.floor(self.uniform(n) * span), span - 1).astype(np.int64)
        return int(out[0]) if size is None else out

    def sample_indices(self, n, m):
        """Sorted uniform sample of ``m`` distinct indices from ``range(n)``."""
        keys = self.next_u64(n)
        return np.sort(np.argsort(keys, kind="stable")[:m])

    def permutation(self, n):
        return np.argsort(self.next_u64(n), kind="stable")
