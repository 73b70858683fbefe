"""Deterministic random stream shared by the python API and the kernels."""

import numpy as np

from . import _kernels


class RandomStream:
    """SplitMix64 stream.  The raw state array can be handed to the numba
    kernels; draws made there and here interleave on the same sequence,
    which keeps traced and untraced runs bit-identical."""

    def __init__(self, seed):
        self.state = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF)],
                              dtype=np.uint64)

    def uniform(self):
        """Next float in [0, 1)."""
        return float(_kernels.rng_uniform(self.state))

    def integer(self, n):
        """Next int in [0, n)."""
        k = int(self.uniform() * n)
        return n - 1 if k >= n else k

    def spawn_seed(self):
        """Draw a fresh 64-bit seed from this stream."""
        return int(_kernels.rng_next(self.state))


def episode_seed(seed, episode_index):
    """Per-episode seed: experiment seed XOR episode index."""
    return (int(seed) ^ int(episode_index)) & 0xFFFFFFFFFFFFFFFF
