"""Seedable random number generation shared by every stochastic component.

The package pins one generator, xoshiro256++ seeded through splitmix64, so
that a run is a pure function of its 64-bit seed.  The primitives are
numba-compiled functions operating on a 4-word uint64 state array; the
thin Python wrapper calls the same compiled code that the compiled
simulation engine uses, so the python and compiled engines consume
identical random streams draw for draw.

Draw conventions, fixed once and relied on everywhere:

- ``rand_below(n)`` masks a 64-bit word down to the smallest covering
  power of two and rejects values >= n.  Unbiased, variable word count.
- ``rand_unit()`` maps the top 53 bits of one word to a double in [0, 1).
- seeding feeds the seed through four splitmix64 steps, one per state
  word, which also makes near-identical seeds produce unrelated streams.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_MASK64 = (1 << 64) - 1

# splitmix64 constants
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True, nogil=True)
def mix64(z):
    """splitmix64 finalizer: bijective avalanche mix of one uint64."""
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True)
def seed_state(seed):
    """Expand a 64-bit seed into a xoshiro256++ state via splitmix64."""
    s = np.empty(4, np.uint64)
    x = np.uint64(seed)
    for i in range(4):
        x = x + _GAMMA
        s[i] = mix64(x)
    if s[0] | s[1] | s[2] | s[3] == np.uint64(0):
        s[0] = _GAMMA  # the all-zero state is a fixed point; dodge it
    return s


@njit(cache=True, nogil=True)
def next_u64(s):
    """Advance the state one step and return a uniform uint64."""
    x = s[0] + s[3]
    r = ((x << np.uint64(23)) | (x >> np.uint64(41))) + s[0]
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = (s[3] << np.uint64(45)) | (s[3] >> np.uint64(19))
    return r


@njit(cache=True, nogil=True)
def rand_unit(s):
    """Uniform double in [0, 1) from the top 53 bits of one word."""
    return (next_u64(s) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True, nogil=True)
def rand_below(s, n):
    """Uniform integer in [0, n) by masked rejection; n >= 1."""
    m = np.uint64(n - 1)
    m |= m >> np.uint64(1)
    m |= m >> np.uint64(2)
    m |= m >> np.uint64(4)
    m |= m >> np.uint64(8)
    m |= m >> np.uint64(16)
    m |= m >> np.uint64(32)
    while True:
        v = next_u64(s) & m
        if v < np.uint64(n):
            return np.int64(v)


@njit(cache=True, nogil=True)
def derive_stream(base, a, b, c):
    """Mix three non-negative indices into a base seed.

    Each index is multiplied by an odd constant (bijective mod 2**64) and
    absorbed through the splitmix64 finalizer, so two calls differing in
    any single index are guaranteed distinct, and differing in several
    collide only with avalanche probability ~2**-64.
    """
    h = np.uint64(base)
    h = mix64((h + _GAMMA) ^ (np.uint64(a) * _MIX1))
    h = mix64((h + _GAMMA) ^ (np.uint64(b) * _MIX1))
    h = mix64((h + _GAMMA) ^ (np.uint64(c) * _MIX1))
    return h


class Xoshiro256:
    """Deterministic per-run stream over the compiled primitives.

    The state array can be handed directly to compiled kernels; draws made
    there continue the same stream.
    """

    __slots__ = ("_s",)

    def __init__(self, seed: int):
        self._s = seed_state(np.uint64(seed & _MASK64))

    def next_u64(self) -> int:
        return int(next_u64(self._s))

    def rand_unit(self) -> float:
        return float(rand_unit(self._s))

    def rand_below(self, n: int) -> int:
        if n < 1:
            raise ValueError("rand_below needs n >= 1")
        return int(rand_below(self._s, n))

    @property
    def state(self):
        return self._s

    def state_tuple(self) -> tuple:
        return tuple(int(w) for w in self._s)
