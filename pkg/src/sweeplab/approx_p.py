"""Coin-flip approximation: lineages independently stay with the mutant with probability p."""
from __future__ import annotations

import math

import numpy as np

from .genealogy import PairStats
from .partitions import MarkedPartition, encode_partitions
from .rng import as_generator


def alpha_and_p(N: int, r: float, s: float):
    """``alpha = r ln(2N) / s`` and ``p = exp(-alpha)``."""
    alpha = r * math.log(2 * N) / s
    return alpha, math.exp(-alpha)


def _check_p(p):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0,1], got {p!r}")


def sample_p_partition(n: int, p: float, rng=None) -> MarkedPartition:
    _check_p(p)
    heads = as_generator(rng).random(n) < p
    labels = [0 if h else i for i, h in enumerate(heads, start=1)]
    return MarkedPartition.from_labels(labels, 0)


def sample_p_partition_codes(n: int, p: float, size: int, rng=None) -> np.ndarray:
    """Integer codes of ``size`` independent p-partitions."""
    _check_p(p)
    heads = as_generator(rng).random((size, n)) < p
    labels = np.where(heads, 0, np.arange(1, n + 1))
    return encode_partitions(labels, heads)


def qp_probability(pi: MarkedPartition, p: float) -> float:
    """Probability of ``pi`` under the p-partition law.

    Nonzero only when every block except a marked one is a singleton.
    """
    _check_p(p)
    heads = 0
    for b, block in enumerate(pi.blocks):
        if b == pi.marked:
            heads = len(block)
        elif len(block) > 1:
            return 0.0
    # a marked singleton and an unmarked singleton are different outcomes;
    # the all-tails outcome is the unmarked all-singletons partition
    return p**heads * (1.0 - p) ** (pi.n - heads)


def qp_pair_stats(p: float) -> PairStats:
    _check_p(p)
    q = 1.0 - p
    return PairStats(pinb=q, p2inb=q * q, p2cinb=0.0, p1B1b=2.0 * p * q)
