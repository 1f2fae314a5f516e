"""Backward ancestry through a simulated sweep, and the statistics built on it."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

from . import _kernels
from .model import SweepTrajectory
from .partitions import MarkedPartition

#: Sentinel for the escape or coalescence time of a lineage that never escapes or coalesces.
NEVER = -1


class TrajectoryIntegrityError(ValueError):
    """Raised when an event list cannot be replayed consistently."""


@dataclass
class AncestryTrace:
    """Ancestry of sampled individuals ``0..n-1`` at fixation.

    ``escape_time[i]`` is the last time the lineage sat on a ``b`` chromosome
    and ``coalescence_time[i, j]`` the last time lineages ``i`` and ``j`` shared
    an ancestor, both in event-count time and :data:`NEVER` if it did not
    happen. ``tau[J]`` is the first time with at least ``J`` copies of ``B``.
    """

    sample_indices: np.ndarray
    initial_mutant: int
    ancestor_at_0: np.ndarray
    escape_time: np.ndarray
    coalescence_time: np.ndarray
    tau: np.ndarray

    @property
    def n(self) -> int:
        return int(self.sample_indices.shape[0])

    @property
    def ancestor_has_B_at_0(self) -> np.ndarray:
        return self.ancestor_at_0 == self.initial_mutant


@dataclass(frozen=True)
class PairStats:
    """The four two-lineage sweep statistics with standard errors.

    ``pinb``: a lineage escapes; ``p2inb``: both escape, distinct ancestors;
    ``p2cinb``: both escape, common ancestor; ``p1B1b``: exactly one escapes.
    ``se`` follows the same order; analytic values have ``n_reps == 0``.
    """

    pinb: float
    p2inb: float
    p2cinb: float
    p1B1b: float
    n_reps: int = 0
    se: Tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    NAMES = ("pinb", "p2inb", "p2cinb", "p1B1b")

    def values(self) -> Tuple[float, float, float, float]:
        return (self.pinb, self.p2inb, self.p2cinb, self.p1B1b)

    def identity_residual(self) -> float:
        return self.pinb - (self.p2inb + self.p2cinb + self.p1B1b / 2)

    @classmethod
    def from_counts(cls, neither: int, one: int, both_distinct: int, both_same: int) -> "PairStats":
        reps = neither + one + both_distinct + both_same
        if reps <= 0:
            raise ValueError("no replicates")
        both = both_distinct + both_same
        pinb = (2 * both + one) / (2 * reps)
        # per-replicate mean escape fraction y in {0, 1/2, 1}
        second = (both + one / 4) / reps
        var_pinb = max(second - pinb * pinb, 0.0)

        def bse(k):
            p = k / reps
            return math.sqrt(p * (1 - p) / reps)

        return cls(
            pinb=pinb,
            p2inb=both_distinct / reps,
            p2cinb=both_same / reps,
            p1B1b=one / reps,
            n_reps=reps,
            se=(math.sqrt(var_pinb / reps), bse(both_distinct), bse(both_same), bse(one)),
        )


def trace_ancestry(traj: SweepTrajectory, n: int) -> AncestryTrace:
    """Trace the neutral-site lineages of individuals ``0..n-1`` back to time 0."""
    if not traj.fixed:
        raise ValueError("ancestry is traced only through trajectories that fixed B")
    two_n = traj.params.two_n
    if not 1 <= n <= two_n:
        raise ValueError(f"sample size must lie in 1..2N, got {n}")
    bad, pos, escape, coal = _kernels.trace_lineages(
        traj.victim, traj.parent, traj.source, traj.victim_prev_allele, traj.x_path,
        traj.n_events, two_n, traj.initial_mutant, n,
    )
    if bad != -1:
        where = "time-0 population" if bad == -2 else f"event at time {bad}"
        raise TrajectoryIntegrityError(f"trajectory is inconsistent at the {where}")
    return AncestryTrace(
        sample_indices=np.arange(n),
        initial_mutant=traj.initial_mutant,
        ancestor_at_0=np.asarray(pos, dtype=np.int64),
        escape_time=np.asarray(escape),
        coalescence_time=np.asarray(coal),
        tau=traj.hitting_times(),
    )


def theta_partition(trace: AncestryTrace) -> MarkedPartition:
    """Sample members sharing a time-0 ancestor form a block; the mutant's block is marked."""
    return MarkedPartition.from_labels(trace.ancestor_at_0.tolist(), trace.initial_mutant)


def pair_diagnostics(trace: AncestryTrace, J: int):
    """``(K, coalesced)``: lineages escaping at or after ``tau_J``, and pairs coalescing then.

    ``coalesced`` is an ``n x n`` boolean matrix with ``G(i, j) >= tau_J``.
    """
    if not 1 <= J < trace.tau.shape[0]:
        raise ValueError(f"level J must lie in 1..2N, got {J}")
    tj = trace.tau[J]
    k = int(np.count_nonzero(trace.escape_time >= tj))
    coalesced = trace.coalescence_time >= tj
    np.fill_diagonal(coalesced, False)
    return k, coalesced


def pair_outcome(ancestor_at_0, initial_mutant) -> int:
    """Category of a two-lineage sample: 0 neither escapes, 1 exactly one, 2 both distinct, 3 both shared."""
    a, b = int(ancestor_at_0[0]), int(ancestor_at_0[1])
    ea, eb = a != initial_mutant, b != initial_mutant
    if ea and eb:
        return 3 if a == b else 2
    return int(ea) + int(eb)


def pair_stats_from_traces(traces: Iterable[AncestryTrace]) -> PairStats:
    counts = [0, 0, 0, 0]
    for tr in traces:
        if tr.n != 2:
            raise ValueError("pair statistics need traces of exactly two lineages")
        counts[pair_outcome(tr.ancestor_at_0, tr.initial_mutant)] += 1
    if sum(counts) == 0:
        raise ValueError("no traces")
    return PairStats.from_counts(*counts)


@dataclass
class OneStepTally:
    """Counts behind the one-step recombination and coalescence frequencies.

    ``steps[k, d]`` counts proposals taking X from ``k`` to ``k + d - 1``;
    ``events[c, k, d]`` counts outcome ``c`` (see :func:`_kernels.replay_one_step`).
    Arrays add across replicates.
    """

    two_n: int
    steps: np.ndarray
    events: np.ndarray

    @classmethod
    def empty(cls, two_n: int) -> "OneStepTally":
        return cls(two_n, np.zeros((two_n + 1, 3), np.int64), np.zeros((5, two_n + 1, 3), np.int64))

    def add(self, traj: SweepTrajectory) -> None:
        self.add_arrays(
            traj.victim, traj.parent, traj.source, traj.n_events, traj.initial_mutant,
            traj.x_path, traj.level_counts,
        )

    def add_arrays(self, victim, parent, source, n_events, mutant, xpath, level_counts):
        self.events += _kernels.replay_one_step(victim, parent, source, n_events, self.two_n, mutant, xpath)
        self.steps[:, 0] += level_counts[_kernels.DOWN]
        self.steps[:, 1] += level_counts[_kernels.HOLD]
        self.steps[:, 2] += level_counts[_kernels.UP]

    def merge(self, other: "OneStepTally") -> None:
        self.steps += other.steps
        self.events += other.events

    def _denominator(self, c, l):
        two_n = self.two_n
        return [l, two_n - l, l * (l - 1) / 2, (two_n - l) * (two_n - l - 1) / 2, l * (two_n - l)][c]

    def frequency(self, outcome: str, k: int, l: int):
        """Estimate and standard error of a one-step probability at ``X: k -> l``.

        ``outcome`` is one of ``pB``, ``pb`` (recombination across the
        selected locus) or ``BB``, ``bb``, ``Bb`` (coalescence).
        """
        c = {"pB": 0, "pb": 1, "BB": 2, "bb": 3, "Bb": 4}[outcome]
        d = l - k + 1
        steps = int(self.steps[k, d])
        if steps == 0:
            return float("nan"), float("nan"), 0
        per_step = self.events[c, k, d] / steps
        denom = self._denominator(c, l)
        if denom == 0:
            return float("nan"), float("nan"), steps
        se = math.sqrt(per_step * (1 - per_step) / steps)
        return per_step / denom, se / denom, steps


def occupancy_means(level_counts: np.ndarray):
    """Per-level up/down/hold counts of one run, in (U, D, H) order."""
    return level_counts[_kernels.UP], level_counts[_kernels.DOWN], level_counts[_kernels.HOLD]
