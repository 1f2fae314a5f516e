"""Branching-process views of the early sweep.

The B individuals with an infinite line of descent form a Yule process at
rate ``s``; while there are ``j`` of them each changes neutral type at rate
``r(1-s)``, and at each split the newborn gets a fresh type with probability
``r``. Sampling from this skeleton gives the early-sweep marked partition.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._jit import njit
from .partitions import MarkedPartition, encode_partitions
from .rng import KernelStream, as_generator, as_kernel_stream, next_below, next_double


@dataclass
class SkeletonState:
    """Types of the ``H`` infinite-line lineages just before the next split.

    ``split_times[j-1]`` is the first time with ``j`` lineages (the first is 0).
    Type 0 is the founder's; every mutation or typed birth creates a new id.
    """

    lineage_types: np.ndarray
    split_times: np.ndarray
    H: int


@dataclass(frozen=True)
class UrnSpec:
    """Urn with one red and ``k - 1`` black balls and ``additions`` reinforced draws."""

    k: int
    additions: int

    def __post_init__(self):
        if self.k < 2 or self.additions < 0:
            raise ValueError("need k >= 2 and additions >= 0")


@njit(cache=True)
def _grow_skeleton(state, H, r, s, types, times):
    p_split = s / (s + r * (1.0 - s))
    nxt = 1
    j = 1
    t = 0.0
    types[0] = 0
    times[0] = 0.0
    while True:
        t += -math.log(1.0 - next_double(state)) / (j * (s + r * (1.0 - s)))
        if next_double(state) < p_split:
            if j == H:
                return nxt
            c = next_below(state, j)
            types[j] = types[c]
            if next_double(state) < r:
                types[j] = nxt
                nxt += 1
            times[j] = t
            j += 1
        else:
            types[next_below(state, j)] = nxt
            nxt += 1


@njit(cache=True)
def _skeleton_batch(state, H, r, s, n, size, out):
    types = np.empty(H, dtype=np.int64)
    times = np.empty(H, dtype=np.float64)
    idx = np.empty(H, dtype=np.int64)
    for d in range(size):
        _grow_skeleton(state, H, r, s, types, times)
        for i in range(H):
            idx[i] = i
        for i in range(n):  # partial Fisher-Yates
            c = i + next_below(state, H - i)
            tmp = idx[i]
            idx[i] = idx[c]
            idx[c] = tmp
            out[d, i] = types[idx[i]]


def _check_skeleton(n, r, s, H):
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0,1), got {s!r}")
    if not 0.0 <= r < s:
        raise ValueError(f"need 0 <= r < s, got r={r!r}")
    if H < 1:
        raise ValueError("H must be at least 1")
    if not 1 <= n <= H:
        raise ValueError(f"sample size n must lie in 1..H, got n={n}, H={H}")


def simulate_yule_skeleton(H: int, r: float, s: float, rng) -> SkeletonState:
    _check_skeleton(1, r, s, H)
    stream = as_kernel_stream(rng)
    types = np.empty(H, dtype=np.int64)
    times = np.empty(H, dtype=np.float64)
    with np.errstate(over="ignore"):
        _grow_skeleton(stream.state, H, r, s, types, times)
    return SkeletonState(types, times, H)


def simulate_yule_skeleton_partition(n: int, r: float, s: float, H: int, rng) -> MarkedPartition:
    """Sample ``n`` of the ``H`` skeleton lineages; equal types share a block and
    the founder's type is marked."""
    _check_skeleton(n, r, s, H)
    out = np.empty((1, n), dtype=np.int64)
    stream = as_kernel_stream(rng)
    with np.errstate(over="ignore"):
        _skeleton_batch(stream.state, H, r, s, n, 1, out)
    return MarkedPartition.from_labels(out[0].tolist(), 0)


def skeleton_partition_codes(n: int, r: float, s: float, H: int, size: int, rng) -> np.ndarray:
    _check_skeleton(n, r, s, H)
    stream = as_kernel_stream(rng)
    out = np.empty((size, n), dtype=np.int64)
    with np.errstate(over="ignore"):
        _skeleton_batch(stream.state, H, r, s, n, size, out)
    return encode_partitions(out, out == 0)


def yule_descendant_fraction(k: int, H: int, size: int, rng=None) -> np.ndarray:
    """Fraction of the ``H`` Yule lineages descending from one lineage tagged at size ``k``."""
    if not 1 <= k <= H:
        raise ValueError("need 1 <= k <= H")
    gen = as_generator(rng)
    tagged = np.ones(size, dtype=np.int64)
    for j in range(k, H):
        tagged += gen.random(size) * j < tagged
    return tagged / H


class BranchingPath(NamedTuple):
    times: np.ndarray
    infinite: np.ndarray
    finite: np.ndarray


def simulate_two_type_branching(
    s: float, horizon: float, rng=None, infinite0: int = 1, finite0: int = 0, max_infinite: int | None = None
) -> BranchingPath:
    """Infinite-line / finite-line decomposition of the birth-rate-1, death-rate-(1-s) process.

    Infinite-line individuals split into two infinite-line ones at rate ``s``
    and emit a finite-line child at rate ``2(1-s)``; finite-line individuals
    live at rate ``2-s`` and then split in two with probability
    ``(1-s)/(2-s)`` or die. Runs until ``horizon``, extinction, or the
    infinite-line count exceeding ``max_infinite``; returns the path at jumps.
    """
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0,1), got {s!r}")
    gen = as_generator(rng)
    a, b = int(infinite0), int(finite0)
    t = 0.0
    times, inf_path, fin_path = [0.0], [a], [b]
    p_finite_split = (1.0 - s) / (2.0 - s)
    while a + b > 0:
        rate_a = a * (2.0 - s)
        rate_b = b * (2.0 - s)
        total = rate_a + rate_b
        t += gen.exponential(1.0 / total)
        if t > horizon:
            break
        u = gen.random() * total
        if u < rate_a:
            if u < a * s:
                a += 1
            else:
                b += 1
        else:
            b += 1 if gen.random() < p_finite_split else -1
        times.append(t)
        inf_path.append(a)
        fin_path.append(b)
        if max_infinite is not None and a > max_infinite:
            break
    return BranchingPath(np.asarray(times), np.asarray(inf_path), np.asarray(fin_path))


def polya_q(k: int, a: int, n: int) -> float:
    """Probability that a given set of ``a`` of ``n`` reinforced urn draws are red
    and the rest black, starting from one red and ``k - 1`` black balls."""
    if k < 2 or not 0 <= a <= n:
        raise ValueError(f"need k >= 2 and 0 <= a <= n, got k={k}, a={a}, n={n}")
    if n + k <= 400:
        return (k - 1) * math.factorial(a) * math.factorial(n - a + k - 2) / math.factorial(n + k - 1)
    log_q = math.log(k - 1) + math.lgamma(a + 1) + math.lgamma(n - a + k - 1) - math.lgamma(n + k)
    return math.exp(log_q)


def simulate_urn(spec: UrnSpec, size: int, rng=None) -> np.ndarray:
    """Colours (True = red) of the added balls, one row per independent urn."""
    gen = as_generator(rng)
    red = np.ones(size, dtype=np.int64)
    out = np.empty((size, spec.additions), dtype=bool)
    for i in range(spec.additions):
        draw = gen.random(size) * (spec.k + i) < red
        out[:, i] = draw
        red += draw
    return out
