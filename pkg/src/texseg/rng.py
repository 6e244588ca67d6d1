"""Deterministic per-sample random streams (xoshiro256** seeded via SplitMix64).

Every sample in a dataset owns one stream, derived purely from
(global_seed, sample_index).  Generating sample 7 alone therefore draws
the exact same sequence as generating samples 0..7 in order, on any
number of workers.

The hot paths (bulk noise fields) run through numba kernels; scalar
draws share the same state array, so mixing scalar and bulk draws is
well-defined and reproducible.
"""

from __future__ import annotations

import numba as nb
import numpy as np

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_U64 = np.uint64
_INV_2_53 = 1.0 / (1 << 53)


@nb.njit(nb.uint64(nb.uint64), cache=True)
def _splitmix64_mix(z):
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    return z ^ (z >> _U64(31))


@nb.njit(nb.uint64[:](nb.uint64), cache=True)
def _init_state(seed):
    # Standard xoshiro seeding: four SplitMix64 outputs.  At most one of
    # the four can be zero (SplitMix64 is a bijection of its counter),
    # so the all-zero state is unreachable.
    state = np.empty(4, dtype=np.uint64)
    x = seed
    for i in range(4):
        x += _U64(GOLDEN_GAMMA)
        state[i] = _splitmix64_mix(x)
    return state


@nb.njit(nb.uint64(nb.uint64[:]), cache=True)
def _next_u64(state):
    s0, s1, s2, s3 = state[0], state[1], state[2], state[3]
    x = s1 * _U64(5)
    result = ((x << _U64(7)) | (x >> _U64(57))) * _U64(9)
    t = s1 << _U64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = (s3 << _U64(45)) | (s3 >> _U64(19))
    state[0], state[1], state[2], state[3] = s0, s1, s2, s3
    return result


@nb.njit(nb.void(nb.uint64[:], nb.uint64[:]), cache=True)
def _fill_u64(state, out):
    s0, s1, s2, s3 = state[0], state[1], state[2], state[3]
    for i in range(out.size):
        x = s1 * _U64(5)
        out[i] = ((x << _U64(7)) | (x >> _U64(57))) * _U64(9)
        t = s1 << _U64(17)
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = (s3 << _U64(45)) | (s3 >> _U64(19))
    state[0], state[1], state[2], state[3] = s0, s1, s2, s3


@nb.njit(nb.int64(nb.uint64[:], nb.int64, nb.int64), cache=True)
def _randint(state, lo, hi):
    # Uniform integer on [lo, hi] inclusive, by rejection on u64 draws.
    n = _U64(hi - lo + 1)
    reject_below = (_U64(0) - n) % n  # 2**64 mod n
    while True:
        u = _next_u64(state)
        if u >= reject_below:
            return lo + np.int64(u % n)


class RngStream:
    """Single-owner random stream for one (global_seed, sample_index) pair.

    Not safe for concurrent use; clone per worker via fresh derivation.
    """

    __slots__ = ("global_seed", "sample_index", "_state")

    def __init__(self, global_seed: int, sample_index: int):
        self.global_seed = global_seed & 0xFFFFFFFFFFFFFFFF
        self.sample_index = sample_index & 0xFFFFFFFFFFFFFFFF
        seed = self.global_seed ^ ((self.sample_index * GOLDEN_GAMMA) & 0xFFFFFFFFFFFFFFFF)
        self._state = _init_state(_U64(seed))

    def next_u64(self) -> int:
        return int(_next_u64(self._state))

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return int(_next_u64(self._state) >> _U64(11)) * _INV_2_53

    def uniform(self, lo: float, hi: float) -> float:
        """Uniform float in [lo, hi)."""
        return lo + (hi - lo) * self.random()

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], inclusive on both ends."""
        if hi < lo:
            raise ValueError(f"empty integer range [{lo}, {hi}]")
        return int(_randint(self._state, lo, hi))

    def u64s(self, n: int) -> np.ndarray:
        out = np.empty(n, dtype=np.uint64)
        _fill_u64(self._state, out)
        return out

    def doubles(self, n: int) -> np.ndarray:
        """n uniform floats in [0, 1)."""
        u = np.empty(n, dtype=np.uint64)
        _fill_u64(self._state, u)
        return (u >> _U64(11)).astype(np.float64) * _INV_2_53

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for j in range(len(items) - 1, 0, -1):
            k = self.randint(0, j)
            items[j], items[k] = items[k], items[j]

    def choose_distinct(self, pool: list, k: int) -> list:
        """k distinct elements of pool, by partial Fisher-Yates (k draws)."""
        if k > len(pool):
            raise ValueError(f"cannot choose {k} distinct items from {len(pool)}")
        arr = list(pool)
        for j in range(k):
            m = self.randint(j, len(arr) - 1)
            arr[j], arr[m] = arr[m], arr[j]
        return arr[:k]


def derive_stream(global_seed: int, sample_index: int) -> RngStream:
    """Stream whose output depends only on (global_seed, sample_index)."""
    return RngStream(global_seed, sample_index)
