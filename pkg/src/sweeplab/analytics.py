"""Closed-form quantities for the sweep: hitting probabilities, expected jump
counts, one-step recombination and coalescence probabilities, and the classical
deterministic approximations."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _one_minus_pow(s: float, m: float) -> float:
    """``1 - (1-s)**m`` without cancellation or underflow."""
    return -math.expm1(m * math.log1p(-s))


def hitting_prob(a: int, b: int, k: int, s: float) -> float:
    """Probability that the B-count, started at ``k``, reaches ``b`` before ``a``."""
    if not 0 <= a < k < b:
        raise ValueError(f"need 0 <= a < k < b, got a={a}, k={k}, b={b}")
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0,1), got {s!r}")
    return _one_minus_pow(s, k - a) / _one_minus_pow(s, b - a)


def fixation_prob(N: int, s: float) -> float:
    return hitting_prob(0, 2 * N, 1, s)


def harmonic_tail(J: int, M: int) -> float:
    """``sum_{k=J+1}^{M} 1/k`` by direct summation."""
    if J >= M:
        return 0.0
    return math.fsum(1.0 / np.arange(J + 1, M + 1, dtype=np.float64))


def q_J_value(N: int, J: int, r: float, s: float) -> float:
    """Probability that a lineage escapes after the B-count first reaches ``J``."""
    if not 1 <= J <= 2 * N:
        raise ValueError(f"J must lie in 1..2N, got {J}")
    return -math.expm1(-(r / s) * harmonic_tail(J, 2 * N))


@dataclass(frozen=True)
class JumpCountSummary:
    """Expected up-jumps, down-jumps and holds at level ``k`` after ``tau_j``,
    with the ingredients ``q_k``, ``r_kj`` and ``beta_k``."""

    EU: float
    ED: float
    EH: float
    q_k: float
    r_kj: float
    beta_k: float


def _q(N, s, k):
    if k == 0:
        return 1.0
    two_n = 2 * N
    return s / _one_minus_pow(s, two_n - k) * _one_minus_pow(s, two_n) / _one_minus_pow(s, k + 1)


def _reach(N, s, k, j):
    if k == 0:
        return 0.0
    if j <= k:
        return 1.0
    two_n = 2 * N
    return 1.0 - _one_minus_pow(s, j - k) / _one_minus_pow(s, two_n - k) * _one_minus_pow(s, two_n) / _one_minus_pow(s, j)


def beta_k(N: int, s: float, k: int) -> float:
    m = 2 * N - k
    return k * m / (k * k + m * m + s * k * m)


def expected_jump_counts(N: int, s: float, k: int, j: int) -> JumpCountSummary:
    two_n = 2 * N
    if not (1 <= j <= two_n - 1 and 1 <= k <= two_n - 1):
        raise ValueError(f"need 1 <= j, k <= 2N-1, got j={j}, k={k}")
    qk = _q(N, s, k)
    rkj = _reach(N, s, k, j)
    eu = rkj / qk
    if k > j:
        ed = 1.0 / _q(N, s, k - 1) - 1.0
    else:
        ed = _reach(N, s, k - 1, j) / _q(N, s, k - 1)
    bk = beta_k(N, s, k)
    eh = (eu + ed) / ((2.0 - s) * bk)
    return JumpCountSummary(EU=eu, ED=ed, EH=eh, q_k=qk, r_kj=rkj, beta_k=bk)


def _check_step(N, k, l):
    two_n = 2 * N
    if not (1 <= k <= two_n - 1 and 1 <= l <= two_n and abs(k - l) <= 1):
        raise ValueError(f"invalid one-step transition {k} -> {l} for 2N={two_n}")


def one_step_recomb_probs(N: int, r: float, s: float, k: int, l: int):
    """``(pB, pb)``: a B (resp. b) individual at time t descends at the neutral
    site from an individual of the other type at time t-1, given ``X: k -> l``."""
    _check_step(N, k, l)
    two_n = 2 * N
    if l == k - 1:
        return 0.0, r * k / ((two_n - k + 1) * two_n)
    if l == k + 1:
        return r * (two_n - k) / ((k + 1) * two_n), 0.0
    p = r * beta_k(N, s, k) / two_n
    return p, p


def one_step_coal_probs(N: int, r: float, s: float, k: int, l: int):
    """``(pBB, pbb, pBb)``: two time-t individuals of the given types share a
    time-(t-1) neutral ancestor, given ``X: k -> l``."""
    _check_step(N, k, l)
    two_n = 2 * N
    m = two_n - k
    if l == k - 1:
        return 0.0, 2.0 / (m * (m + 1)) * (1.0 - r * k / two_n), r / (two_n * (m + 1))
    if l == k + 1:
        return 2.0 / (k * (k + 1)) * (1.0 - r * m / two_n), 0.0, r / (two_n * (k + 1))
    c = beta_k(N, s, k) / (k * m)
    return 2.0 * c * (1.0 - r * m / two_n), 2.0 * c * (1.0 - r * k / two_n), r * c


def msh_frequency(R0: float, p0: float, s: float, r: float, tol: float = 1e-12) -> float:
    """Hitchhiking-reduced neutral allele frequency under deterministic selection.

    The series is cut once the geometric tail bound ``R0 (1-r)**(n+1)`` drops
    below ``tol``.
    """
    if not (0.0 <= R0 <= 1.0 and 0.0 <= p0 <= 1.0):
        raise ValueError("R0 and p0 must lie in [0,1]")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if r == 0.0 or p0 == 1.0 or R0 == 0.0:
        return 0.0
    if r >= 1.0:
        terms = 1
    else:
        terms = max(1, math.ceil(math.log(tol / R0) / math.log1p(-r)))
    total = 0.0
    chunk = 1 << 20
    for start in range(0, terms, chunk):
        n = np.arange(start, min(terms, start + chunk), dtype=np.float64)
        with np.errstate(over="ignore"):
            growth = np.exp((n + 1) * math.log1p(s))
        total += math.fsum(r * np.exp(n * math.log1p(-r)) * (1 - p0) / (1 - p0 + p0 * growth))
    return R0 * total


def logistic_frequency(p0: float, s: float, t):
    """Solution of ``dp/dt = s p (1-p)`` from ``p(0) = p0``."""
    if not 0.0 < p0 < 1.0:
        raise ValueError(f"p0 must lie in (0,1), got {p0!r}")
    return p0 / (p0 + (1.0 - p0) * np.exp(-s * np.asarray(t, dtype=float)))
