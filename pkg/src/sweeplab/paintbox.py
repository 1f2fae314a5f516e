"""Paintbox approximation built from thinned Beta(1, k-1) sticks.

Level ``k = L, L-1, ..., 2`` carries a stick ``V_k = zeta_k W_k`` with
``W_k ~ Beta(1, k-1)`` and ``zeta_k ~ Bernoulli(r/s)``; ``Y_k`` is the mass
level ``k`` takes from what the higher levels left over and ``Y_1`` is the
remainder. Each sampled lineage picks a level from ``Y``; lineages that pick
the same level share a block, and level 1 is the mutant's block when the
independent mark coin (probability ``s / (r(1-s) + s)``) says so.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .genealogy import PairStats
from .partitions import MarkedPartition, encode_partitions
from .rng import as_generator


def _check(r, s, L, n=1, q=0.0):
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0,1), got {s!r}")
    if not 0.0 <= r < s:
        raise ValueError(f"need 0 <= r < s so that r/s is a probability, got r={r!r}, s={s!r}")
    if int(L) != L or L < 1:
        raise ValueError(f"L must be a positive integer, got {L!r}")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0,1], got {q!r}")


def mark_probability(r: float, s: float) -> float:
    return s / (r * (1.0 - s) + s)


def default_L(N: int, s: float) -> int:
    return int(math.floor(2 * N * s))


@dataclass
class PaintboxDraw:
    """Latent variables of one paintbox sample.

    Arrays are indexed by level ``k`` (length ``L + 1``); entries below
    ``k = 2`` of ``W``, ``zeta``, ``V`` and ``Y[0]`` are padding. ``Z`` holds
    the level chosen by each of the ``n`` lineages.
    """

    L: int
    W: np.ndarray
    zeta: np.ndarray
    V: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    mark_assigned: bool


def _sticks(r, s, L, shape, gen):
    """Dense ``V`` for levels ``2..L`` (last axis), inversion-sampled Beta(1, k-1)."""
    k = np.arange(2, L + 1)
    zeta = gen.random(shape + (L - 1,)) < r / s
    W = np.zeros(shape + (L - 1,))
    hit = np.nonzero(zeta)
    kk = np.broadcast_to(k, zeta.shape)[hit]
    W[hit] = -np.expm1(np.log(gen.random(kk.shape[0])) / (kk - 1))
    return zeta, W


def _stick_masses(V):
    """``Y[..., 0]`` is level 1; ``Y[..., k-1]`` is level ``k``."""
    keep = np.cumprod((1.0 - V)[..., ::-1], axis=-1)[..., ::-1]  # prod_{j>=k}
    keep = np.concatenate([keep, np.ones(V.shape[:-1] + (1,))], axis=-1)
    return np.concatenate([keep[..., :1], V * keep[..., 1:]], axis=-1)


def _choose_levels(Y, u):
    """Inverse-CDF level choice; ``u`` has shape ``Y.shape[:-1] + (n,)``."""
    cdf = np.cumsum(Y, axis=-1)
    z = (cdf[..., None, :] < u[..., :, None]).sum(axis=-1) + 1
    return np.minimum(z, Y.shape[-1])


def sample_paintbox(n: int, r: float, s: float, L: int, rng=None):
    """One draw: returns ``(PaintboxDraw, MarkedPartition)``."""
    _check(r, s, L, n)
    gen = as_generator(rng)
    zeta, W = _sticks(r, s, L, (), gen)
    V = zeta * W
    Y = _stick_masses(V)
    Z = _choose_levels(Y, gen.random(n))
    mark = bool(gen.random() < mark_probability(r, s))
    pad = np.zeros(2)
    draw = PaintboxDraw(
        L=L,
        W=np.concatenate([np.full(2, np.nan), W]),
        zeta=np.concatenate([pad.astype(bool), zeta]),
        V=np.concatenate([pad, V]),
        Y=np.concatenate([[0.0], Y]),
        Z=Z,
        mark_assigned=mark,
    )
    return draw, MarkedPartition.from_labels(Z.tolist(), 1 if mark else None)


def _batch_codes(n, r, s, L, size, gen, q):
    zeta, W = _sticks(r, s, L, (size,), gen)
    Y = _stick_masses(zeta * W)
    Z = _choose_levels(Y, gen.random((size, n)))
    mark = gen.random(size) < mark_probability(r, s)
    in_marked = (Z == 1) & mark[:, None]
    if q > 0.0:
        xi = gen.random((size, n)) < q
        Z = np.where(xi, -np.arange(1, n + 1), Z)
        in_marked &= ~xi
    return encode_partitions(Z, in_marked)


def sample_paintbox_codes(n, r, s, L, size, rng=None, q=0.0, chunk=None) -> np.ndarray:
    """Partition codes of ``size`` independent draws (thinned by ``q`` when positive)."""
    _check(r, s, L, n, q)
    gen = as_generator(rng)
    chunk = chunk or max(1, min(size, 2_000_000 // max(L, 1)))
    out = [_batch_codes(n, r, s, L, min(chunk, size - i), gen, q) for i in range(0, size, chunk)]
    return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


def sample_paintbox_thinned(n: int, r: float, s: float, L: int, q: float, rng=None) -> MarkedPartition:
    """Paintbox draw in which each lineage independently, with probability ``q``,
    is pulled out into an unmarked singleton."""
    _check(r, s, L, n, q)
    gen = as_generator(rng)
    _, pi = sample_paintbox(n, r, s, L, gen)
    xi = gen.random(n) < q
    labels = pi.labels().tolist()
    for i in range(n):
        if xi[i]:
            labels[i] = -(i + 1)
    return MarkedPartition.from_labels(labels, pi.marked)


def paintbox_moments(r: float, s: float, k: int):
    """First and second moments of the stick ``V_k``."""
    if k < 2:
        raise ValueError("sticks exist only for k >= 2")
    return r / (s * k), 2.0 * r / (s * k * (k + 1))


def paintbox_pair_stats_exact(r: float, s: float, L: int) -> PairStats:
    """Exact two-lineage statistics, using independence of the sticks across levels."""
    _check(r, s, L)
    k = np.arange(2, L + 1, dtype=np.float64)
    ev = r / (s * k)
    ev2 = 2.0 * r / (s * k * (k + 1))
    a = 1.0 - ev
    b = 1.0 - 2.0 * ev + ev2
    p_one = float(np.prod(a))
    # suffix products prod_{k>m} b_k for m = 2..L
    b_above = np.append(np.cumprod(b[::-1])[::-1][1:], 1.0)
    p_same_one = float(np.prod(b))
    p_same_high = math.fsum(ev2 * b_above)
    mp = mark_probability(r, s)
    p2cinb = p_same_high + (1.0 - mp) * p_same_one
    both = 1.0 - 2.0 * mp * p_one + mp * p_same_one
    return PairStats(
        pinb=1.0 - mp * p_one,
        p2inb=both - p2cinb,
        p2cinb=p2cinb,
        p1B1b=2.0 * (mp * p_one - mp * p_same_one),
    )
