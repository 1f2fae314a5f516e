"""Replicate random streams.

Every replicate ``i`` of an experiment draws from a stream keyed by
``(master_seed, i)`` through :class:`numpy.random.SeedSequence`, so results
never depend on how replicates are spread over workers.

The Moran kernels need a generator they can step inside numba; numpy's
``Generator`` methods cost ~70 ns per call from nopython code, so the kernels
carry their own xoshiro256** state (period 2**256 - 1) seeded from the same
SeedSequence. Vectorised samplers use ordinary numpy Generators.
"""
from __future__ import annotations

import numpy as np

from ._jit import JIT_ENABLED, njit

_U32 = np.uint64(0xFFFFFFFF)
_TWO32 = np.uint64(1 << 32)
_INV53 = 1.0 / 9007199254740992.0


def seed_sequence(master_seed: int, *key: int) -> np.random.SeedSequence:
    if master_seed < 0 or master_seed >= 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))


def numpy_stream(master_seed: int, *key: int) -> np.random.Generator:
    """numpy Generator for the stream keyed by ``(master_seed, *key)``."""
    return np.random.Generator(np.random.PCG64(seed_sequence(master_seed, *key)))


@njit(cache=True)
def next_u64(state):
    s0 = state[0]
    s1 = state[1]
    s2 = state[2]
    s3 = state[3]
    x = s1 * np.uint64(5)
    result = ((x << np.uint64(7)) | (x >> np.uint64(57))) * np.uint64(9)
    t = s1 << np.uint64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = (s3 << np.uint64(45)) | (s3 >> np.uint64(19))
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return result


@njit(cache=True)
def next_double(state):
    return np.float64(next_u64(state) >> np.uint64(11)) * _INV53


@njit(cache=True)
def bounded_from_u32(state, x32, m, threshold):
    """Lemire's unbiased map of a 32-bit word onto ``[0, m)``; redraws on rejection."""
    prod = x32 * m
    while (prod & _U32) < threshold:
        x32 = next_u64(state) >> np.uint64(32)
        prod = x32 * m
    return np.int64(prod >> np.uint64(32))


@njit(cache=True)
def rejection_threshold(m):
    return (_TWO32 - m) % m


@njit(cache=True)
def next_below(state, m):
    mu = np.uint64(m)
    return bounded_from_u32(state, next_u64(state) >> np.uint64(32), mu, rejection_threshold(mu))


class KernelStream:
    """xoshiro256** state usable both from Python and inside kernels."""

    def __init__(self, master_seed: int = 0, *key: int):
        self.state = seed_sequence(master_seed, *key).generate_state(4, np.uint64)
        if not self.state.any():  # pragma: no cover - probability 2**-256
            self.state[0] = np.uint64(1)

    def random(self) -> float:
        with np.errstate(over="ignore"):
            return float(next_double(self.state))

    def integers(self, m: int) -> int:
        with np.errstate(over="ignore"):
            return int(next_below(self.state, m))

    def copy(self) -> "KernelStream":
        other = KernelStream.__new__(KernelStream)
        other.state = self.state.copy()
        return other


def as_kernel_stream(rng) -> KernelStream:
    if isinstance(rng, KernelStream):
        return rng
    if isinstance(rng, (int, np.integer)):
        return KernelStream(int(rng))
    raise TypeError(f"expected KernelStream or integer seed, got {type(rng).__name__}")


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng)
    raise TypeError(f"expected numpy Generator or integer seed, got {type(rng).__name__}")


__all__ = [
    "JIT_ENABLED",
    "KernelStream",
    "as_generator",
    "as_kernel_stream",
    "numpy_stream",
    "seed_sequence",
]
