"""Deterministic, platform-independent random index sampling.

Row subsampling must give the same indices for the same seed on every
platform and under any thread count, so it uses a self-contained SplitMix64
stream with a partial Fisher-Yates shuffle instead of numpy's generators.
"""

import numpy as np

from .errors import ValidationError

_MASK = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 counter-based generator (public-domain constants)."""

    def __init__(self, seed):
        self._state = int(seed) & _MASK

    def next_u64(self):
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n):
        """Uniform integer in [0, n) by rejection (unbiased)."""
        if n <= 0:
            raise ValidationError("below() requires n >= 1")
        limit = ((1 << 64) // n) * n
        while True:
            z = self.next_u64()
            if z < limit:
                return z % n


def sample_indices(n_total, n_draw, seed):
    """Draw n_draw distinct indices from range(n_total), uniformly, seeded.

    Partial Fisher-Yates over a virtual identity array; index order is the
    shuffle order, not sorted.
    """
    if not 0 < n_draw <= n_total:
        raise ValidationError(
            f"cannot draw {n_draw} indices from a population of {n_total}"
        )
    gen = SplitMix64(seed)
    displaced = {}
    out = np.empty(n_draw, dtype=np.intp)
    for t in range(n_draw):
        j = t + gen.below(n_total - t)
        vt = displaced.get(t, t)
        vj = displaced.get(j, j)
        out[t] = vj
        displaced[j] = vt
    return out
