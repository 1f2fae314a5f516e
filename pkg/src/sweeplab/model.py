"""Two-locus Moran model of a selective sweep, simulated forward in time.

The population holds ``2N`` haploid individuals indexed ``0..2N-1``. At each
proposed replacement a uniformly chosen victim is replaced by the offspring of
a uniformly chosen parent; replacing a ``B`` by a ``b`` is rejected with
probability ``s``, and with probability ``r`` the newborn takes its neutral
allele from a third uniformly chosen individual. Only accepted replacements
are stored.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .rng import KernelStream, as_kernel_stream, next_below

ALLELE_b = 0
ALLELE_B = 1


@dataclass(frozen=True)
class Params:
    N: int
    s: float
    r: float
    n: int = 1
    seed: int = 0

    @property
    def two_n(self) -> int:
        return 2 * self.N


def validate_params(N, s, r, n=1, seed=0) -> Params:
    """Check model inputs and return them as :class:`Params`.

    Raises ``ValueError`` naming the violated bound.
    """
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    N = int(N)
    s = float(s)
    r = float(r)
    if not math.isfinite(s) or not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0,1), got {s!r}")
    if not math.isfinite(r) or not 0.0 <= r < 1.0:
        raise ValueError(f"r must lie in [0,1), got {r!r}")
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    if n > 2 * N:
        raise ValueError(f"n exceeds 2N ({n} > {2 * N})")
    if int(seed) != seed or not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
    return Params(N=N, s=s, r=r, n=n, seed=int(seed))


@dataclass
class SweepTrajectory:
    """Accepted replacement events of one run, stored column-wise.

    Event ``t`` (1-based time) lives at array index ``t - 1``; ``x_path[t]`` is
    the number of ``B`` individuals after it and ``x_path[0] == 1``.
    ``source`` is -1 when there was no recombination. ``level_counts[d, k]``
    tallies every proposal made at level ``k`` by outcome (up, down, hold);
    rejected proposals appear only there and in ``n_steps``.
    """

    params: Params
    initial_mutant: int
    victim: np.ndarray
    parent: np.ndarray
    source: np.ndarray
    victim_prev_allele: np.ndarray
    x_path: np.ndarray
    n_steps: int
    level_counts: np.ndarray
    attempts: int = 1

    @property
    def n_events(self) -> int:
        return int(self.victim.shape[0])

    @property
    def recombined(self) -> np.ndarray:
        return self.source >= 0

    @property
    def neutral_ancestor(self) -> np.ndarray:
        return np.where(self.source >= 0, self.source, self.parent)

    @property
    def fixed(self) -> bool:
        return int(self.x_path[-1]) == self.params.two_n

    def hitting_times(self) -> np.ndarray:
        """``tau[J]`` = first time with X >= J, for J = 0..2N (-1 if never)."""
        running = np.maximum.accumulate(self.x_path)
        levels = np.arange(self.params.two_n + 1)
        tau = np.searchsorted(running, levels, side="left")
        tau[levels > running[-1]] = -1
        return tau

    def tau(self, J: int) -> int:
        if not 1 <= J <= self.params.two_n:
            raise ValueError(f"level J must lie in 1..2N, got {J}")
        hits = np.flatnonzero(self.x_path >= J)
        return int(hits[0]) if hits.size else -1


@dataclass
class SweepWorkspace:
    """Reusable event buffers; one per worker keeps replicate loops allocation-free."""

    two_n: int
    capacity: int = 1 << 16
    victim: np.ndarray = field(init=False)
    parent: np.ndarray = field(init=False)
    source: np.ndarray = field(init=False)
    prev: np.ndarray = field(init=False)
    xpath: np.ndarray = field(init=False)
    alleles: np.ndarray = field(init=False)
    tallies: np.ndarray = field(init=False)

    def __post_init__(self):
        self._allocate(self.capacity)
        self.alleles = np.zeros(self.two_n, dtype=np.int8)
        self.tallies = np.zeros((3, self.two_n + 1), dtype=np.int64)

    def _allocate(self, capacity):
        self.capacity = capacity
        self.victim = np.empty(capacity, dtype=np.int32)
        self.parent = np.empty(capacity, dtype=np.int32)
        self.source = np.empty(capacity, dtype=np.int32)
        self.prev = np.empty(capacity, dtype=np.int8)
        self.xpath = np.empty(capacity + 1, dtype=np.int32)

    def grow(self, used: int):
        victim, parent, source, prev, xpath = self.victim, self.parent, self.source, self.prev, self.xpath
        self._allocate(2 * self.capacity)
        self.victim[:used] = victim[:used]
        self.parent[:used] = parent[:used]
        self.source[:used] = source[:used]
        self.prev[:used] = prev[:used]
        self.xpath[: used + 1] = xpath[: used + 1]


def _run_attempt(params: Params, stream: KernelStream, ws: SweepWorkspace):
    """One unconditioned run into ``ws``; returns ``(mutant, x, nsteps, nev)``."""
    two_n = params.two_n
    with np.errstate(over="ignore"):
        mutant = int(next_below(stream.state, two_n))
        ws.alleles[:] = ALLELE_b
        ws.alleles[mutant] = ALLELE_B
        ws.tallies[:] = 0
        ws.xpath[0] = 1
        x, nsteps, nev = 1, 0, 0
        while True:
            status, x, nsteps, nev = _kernels.advance_sweep(
                stream.state, two_n, params.s, params.r, ws.alleles, x, nsteps,
                ws.victim, ws.parent, ws.source, ws.prev, ws.xpath, nev, ws.tallies,
            )
            if status == _kernels.ABSORBED:
                return mutant, int(x), int(nsteps), int(nev)
            ws.grow(nev)


def run_in_workspace(params: Params, stream: KernelStream, ws: SweepWorkspace, conditioned=True):
    """Simulate into ``ws`` (resimulating until fixation when ``conditioned``).

    Returns ``(mutant, nsteps, nev, attempts)``; the event arrays are views
    into the workspace valid until its next use.
    """
    attempts = 0
    while True:
        attempts += 1
        mutant, x, nsteps, nev = _run_attempt(params, stream, ws)
        if x == params.two_n or not conditioned:
            return mutant, nsteps, nev, attempts


def _snapshot(params, ws, mutant, nsteps, nev, attempts) -> SweepTrajectory:
    return SweepTrajectory(
        params=params,
        initial_mutant=mutant,
        victim=ws.victim[:nev].copy(),
        parent=ws.parent[:nev].copy(),
        source=ws.source[:nev].copy(),
        victim_prev_allele=ws.prev[:nev].copy(),
        x_path=ws.xpath[: nev + 1].copy(),
        n_steps=nsteps,
        level_counts=ws.tallies.copy(),
        attempts=attempts,
    )


def simulate_sweep(params: Params, rng) -> SweepTrajectory:
    """One unconditioned run until the ``B`` allele is lost or fixed."""
    stream = as_kernel_stream(rng)
    ws = SweepWorkspace(params.two_n)
    mutant, nsteps, nev, attempts = run_in_workspace(params, stream, ws, conditioned=False)
    return _snapshot(params, ws, mutant, nsteps, nev, attempts)


def simulate_conditioned_sweep(params: Params, rng) -> SweepTrajectory:
    """A run conditioned on fixation of ``B``, by rejection.

    The expected number of attempts is ``(1 - (1-s)**2N) / s``.
    """
    stream = as_kernel_stream(rng)
    ws = SweepWorkspace(params.two_n)
    return _snapshot(params, ws, *run_in_workspace(params, stream, ws, conditioned=True))
