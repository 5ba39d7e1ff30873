"""Deterministic pseudo-random number generation.

The whole package draws from a single generator family so that runs are
reproducible bit-for-bit from a 64-bit seed, whether the draws happen in
Python helpers or inside the jitted interaction kernel:

* xoshiro256++ produces the raw 64-bit stream.  Its 256-bit state lives in a
  ``uint64[4]`` numpy array that is shared by reference, so Python-side code
  and jitted code consume one stream in call order.
* splitmix64 expands the 64-bit seed into the initial state, which avoids
  correlated streams for adjacent seeds.
* Bounded draws use bitmask rejection: draw, mask down to the next power of
  two, reject values >= bound.  This is exact (no modulo bias).

Design decision: the generator is implemented here instead of wrapping
``numpy.random`` because the interaction kernel needs inlineable, njit-safe
primitives and a state layout it can mutate in place.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_U64 = np.uint64

_SPLITMIX_GAMMA = _U64(0x9E3779B97F4A7C15)
_MIX_1 = _U64(0xBF58476D1CE4E5B9)
_MIX_2 = _U64(0x94D049BB133111EB)

MASK64 = (1 << 64) - 1


@njit(cache=True, inline="always")
def _rotl(x, k):
    return _U64((x << _U64(k)) | (x >> _U64(64 - k)))


@njit(cache=True)
def splitmix64(state):
    """Advance a 1-element uint64 state array and return the next output."""
    state[0] = state[0] + _SPLITMIX_GAMMA
    z = state[0]
    z = (z ^ (z >> _U64(30))) * _MIX_1
    z = (z ^ (z >> _U64(27))) * _MIX_2
    return z ^ (z >> _U64(31))


@njit(cache=True)
def seed_state(seed):
    """Expand a 64-bit seed into a xoshiro256++ state via splitmix64."""
    sm = np.empty(1, dtype=np.uint64)
    sm[0] = seed
    out = np.empty(4, dtype=np.uint64)
    for i in range(4):
        out[i] = splitmix64(sm)
    # The all-zero state is the one fixed point of xoshiro; splitmix64 makes
    # it unreachable in practice but the guard keeps the contract total.
    if out[0] == 0 and out[1] == 0 and out[2] == 0 and out[3] == 0:
        out[0] = _SPLITMIX_GAMMA
    return out


@njit(cache=True, inline="always")
def next_u64(state):
    """xoshiro256++ step: return the next 64-bit output, mutating state."""
    result = _rotl(state[0] + state[3], 23) + state[0]
    t = state[1] << _U64(17)
    state[2] ^= state[0]
    state[3] ^= state[1]
    state[1] ^= state[2]
    state[0] ^= state[3]
    state[2] ^= t
    state[3] = _rotl(state[3], 45)
    return result


@njit(cache=True, inline="always")
def mask_for(bound):
    """Smallest all-ones mask covering bound-1 (bound >= 1, as uint64)."""
    m = _U64(bound - _U64(1))
    m |= m >> _U64(1)
    m |= m >> _U64(2)
    m |= m >> _U64(4)
    m |= m >> _U64(8)
    m |= m >> _U64(16)
    m |= m >> _U64(32)
    return m


@njit(cache=True, inline="always")
def randbelow_masked(state, bound, mask):
    """Uniform draw in [0, bound) given a precomputed rejection mask."""
    while True:
        r = next_u64(state) & mask
        if r < bound:
            return np.int64(r)


@njit(cache=True)
def randbelow(state, bound):
    """Uniform draw in [0, bound) with bitmask rejection (bound >= 1)."""
    b = _U64(bound)
    return randbelow_masked(state, b, mask_for(b))


@njit(cache=True)
def sample_pair_state(state, n):
    """Ordered pair of distinct indices in [0, n), uniform over n(n-1).

    Two independent draws; on collision both are redrawn, which keeps the
    accepted pair exactly uniform over ordered distinct pairs.
    """
    b = _U64(n)
    mask = mask_for(b)
    i = randbelow_masked(state, b, mask)
    j = randbelow_masked(state, b, mask)
    while i == j:
        i = randbelow_masked(state, b, mask)
        j = randbelow_masked(state, b, mask)
    return i, j


def _mix_once(x: int) -> int:
    """One splitmix64 step from state x, in plain Python integers."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stable_mix(*values: int) -> int:
    """Order-sensitive deterministic hash of integers onto 64 bits.

    Used to derive per-trial seeds from (seed_base, size, trial) without
    relying on Python's salted ``hash``.  Each value is xored into the
    running digest and re-avalanched, so nearby inputs land far apart.
    """
    h = 0
    for v in values:
        h = _mix_once(h ^ (int(v) & MASK64))
    return h


class Rng:
    """Seedable random stream over the shared xoshiro256++ core.

    The ``state`` array may be handed to jitted kernels, which advance the
    same stream in place; interleaving Python and kernel draws is therefore
    well defined and reproducible.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must fit in 64 bits, got {seed}")
        self.state = seed_state(_U64(seed))

    def next_u64(self) -> int:
        return int(next_u64(self.state))

    def randbelow(self, bound: int) -> int:
        if bound < 1:
            raise ValueError(f"bound must be >= 1, got {bound}")
        return int(randbelow(self.state, _U64(bound)))

    def sample_pair(self, n: int) -> tuple[int, int]:
        """Ordered pair of distinct agent indices, uniform over n(n-1)."""
        if n < 2:
            raise ValueError(f"need a population of at least 2, got n={n}")
        i, j = sample_pair_state(self.state, _U64(n))
        return int(i), int(j)

    def sample_distinct(self, k: int, n: int) -> np.ndarray:
        """k distinct values from [0, n), by partial Fisher-Yates."""
        if not 0 <= k <= n:
            raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
        pool = np.arange(n, dtype=np.int64)
        for i in range(k):
            j = i + self.randbelow(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k].copy()
