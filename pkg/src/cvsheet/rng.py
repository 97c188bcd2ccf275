"""SplitMix64, a portable counter-based 64-bit generator.

The i-th output (i = 0, 1, ...) for a seed ``s`` is ``mix(s + (i + 1) * GAMMA)``
modulo 2**64, with::

    GAMMA = 0x9E3779B97F4A7C15
    mix(z): z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
            z = (z ^ (z >> 27)) * 0x94D049BB133111EB
            return z ^ (z >> 31)

Uniform doubles in [0, 1) are ``(x >> 11) * 2**-53``. Independent streams
use the seed ``mix(s + stream * STREAM_GAMMA)``. Any language with
wrapping 64-bit integers reproduces these sequences bit for bit.
"""

from __future__ import annotations

import numpy as np

MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
STREAM_GAMMA = 0xD1B54A32D192ED03
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    z &= MASK
    z = ((z ^ (z >> 30)) * _M1) & MASK
    z = ((z ^ (z >> 27)) * _M2) & MASK
    return z ^ (z >> 31)


def _mix_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def derive_seed(seed: int, stream: int) -> int:
    return mix64((seed + stream * STREAM_GAMMA) & MASK)


class SplitMix64:
    """Stateful wrapper; ``next_u64`` and the batch methods share one counter."""

    def __init__(self, seed: int):
        if not 0 <= seed <= MASK:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.seed = int(seed)
        self.counter = 0

    def next_u64(self) -> int:
        self.counter += 1
        return mix64(self.seed + self.counter * GAMMA)

    def u64(self, count: int) -> np.ndarray:
        idx = np.arange(self.counter + 1, self.counter + count + 1, dtype=np.uint64)
        self.counter += count
        with np.errstate(over="ignore"):
            z = np.uint64(self.seed) + idx * np.uint64(GAMMA)
            return _mix_array(z)

    def uniform(self, count: int) -> np.ndarray:
        return (self.u64(count) >> np.uint64(11)).astype(np.float64) * 2.0**-53
