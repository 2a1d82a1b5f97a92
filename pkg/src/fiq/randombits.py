"""Counter-based splittable random bit source.

Bit n of stream (seed, stream_id) is a pure function of (seed, stream_id, n):
a splitmix64-style finalizer applied to a per-stream key advanced by a Weyl
increment.  That makes sampling reproducible by construction, independent of
scheduling or thread count, and lets whole (stream x index) grids be generated
in one vectorized shot.

A rational bias a/b is realized by thresholding the 64-bit uniform output at
floor(a * 2^64 / b); the realized probability differs from a/b by less than
2^-64.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .propensity import HALF, as_propensity

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_STREAM_GAMMA = 0xD1B54A32D192ED03


def _mix(x: int) -> int:
    """splitmix64 finalizer on a python int."""
    x &= _MASK
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK
    x ^= x >> 31
    return x


def _mix_arr(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64, copy=True)
    x ^= x >> np.uint64(30)
    x *= np.uint64(0xBF58476D1CE4E5B9)
    x ^= x >> np.uint64(27)
    x *= np.uint64(0x94D049BB133111EB)
    x ^= x >> np.uint64(31)
    return x


def _stream_key(seed: int, stream_id: int) -> int:
    return _mix(_mix(seed) + stream_id * _STREAM_GAMMA)


def bias_threshold(bias: Fraction) -> int:
    """64-bit threshold realizing P(bit=1) = bias to within 2^-64."""
    bias = as_propensity(bias)
    return (bias.numerator << 64) // bias.denominator


def uniform64_grid(seed: int, stream_ids: np.ndarray, first: int, count: int) -> np.ndarray:
    """64-bit uniforms for every (stream, index) pair; shape (len(streams), count)."""
    keys = _mix_arr(_mix_arr(np.full(1, seed, dtype=np.uint64))[0]
                    + stream_ids.astype(np.uint64) * np.uint64(_STREAM_GAMMA))
    idx = np.arange(first, first + count, dtype=np.uint64) * np.uint64(_GAMMA)
    return _mix_arr(keys[:, None] + idx[None, :])


def threshold_bits(u: np.ndarray, threshold: int) -> np.ndarray:
    if threshold >= 1 << 64:
        return np.ones(u.shape, dtype=np.uint8)
    if threshold <= 0:
        return np.zeros(u.shape, dtype=np.uint8)
    return (u < np.uint64(threshold)).astype(np.uint8)


@dataclass(frozen=True)
class RandomBitSource:
    """A stream of independent biased bits r(1), r(2), ...

    Identical (seed, bias, stream_id) reproduce the identical sequence.
    Distinct stream_ids give statistically independent streams, suitable for
    one-stream-per-realization Monte Carlo.
    """

    seed: int
    bias: Fraction = HALF
    stream_id: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.seed < (1 << 64):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.stream_id < 0:
            raise ValueError(f"stream_id must be nonnegative, got {self.stream_id}")
        object.__setattr__(self, "bias", as_propensity(self.bias))

    def with_stream(self, stream_id: int) -> "RandomBitSource":
        return replace(self, stream_id=stream_id)

    def bits(self, first: int, count: int) -> np.ndarray:
        """Bits r(first) .. r(first+count-1) as a uint8 array."""
        if first < 1 or count < 0:
            raise ValueError("bit indices are 1-based and count must be >= 0")
        u = self.uniforms(np.array([self.stream_id]), first, count)[0]
        return threshold_bits(u, bias_threshold(self.bias))

    def uniforms(self, stream_ids: np.ndarray, first: int, count: int) -> np.ndarray:
        """Raw 64-bit uniforms for many streams; row i is stream stream_ids[i]."""
        return uniform64_grid(self.seed, np.asarray(stream_ids), first, count)

    def bit_matrix(self, stream_ids: np.ndarray, first: int, count: int) -> np.ndarray:
        """Bits for many streams at once; row i is stream stream_ids[i]."""
        u = self.uniforms(stream_ids, first, count)
        return threshold_bits(u, bias_threshold(self.bias))
