import numpy as np
import pytest

from oracles import forward_ancestry
from sweeplab.genealogy import (
    NEVER,
    AncestryTrace,
    OneStepTally,
    PairStats,
    TrajectoryIntegrityError,
    pair_diagnostics,
    pair_outcome,
    pair_stats_from_traces,
    theta_partition,
    trace_ancestry,
)
from sweeplab.model import Params, SweepTrajectory, simulate_conditioned_sweep
from sweeplab.partitions import MarkedPartition
from sweeplab.rng import KernelStream


def hand_trajectory(prev=(0, 0, 0)):
    """2N=4, mutant 0: 1 copies 0; 2 copies 1 but takes its neutral allele from 3; 3 copies 2."""
    params = Params(N=2, s=0.5, r=0.5)
    level_counts = np.zeros((3, 5), np.int64)
    level_counts[0, 1:4] = 1
    return SweepTrajectory(
        params=params,
        initial_mutant=0,
        victim=np.array([1, 2, 3], np.int32),
        parent=np.array([0, 1, 2], np.int32),
        source=np.array([-1, 3, -1], np.int32),
        victim_prev_allele=np.array(prev, np.int8),
        x_path=np.array([1, 2, 3, 4], np.int32),
        n_steps=3,
        level_counts=level_counts,
        attempts=1,
    )


def test_hand_built_trace():
    tr = trace_ancestry(hand_trajectory(), 4)
    assert tr.ancestor_at_0.tolist() == [0, 0, 3, 3]
    assert tr.ancestor_has_B_at_0.tolist() == [True, True, False, False]
    assert tr.escape_time.tolist() == [NEVER, NEVER, 1, 1]
    G = tr.coalescence_time
    assert G[2, 3] == G[3, 2] == 2
    assert G[0, 1] == 0
    assert G[0, 2] == G[1, 3] == NEVER
    assert tr.tau[1:].tolist() == [0, 1, 2, 3]
    pi = theta_partition(tr)
    assert pi == MarkedPartition(4, ((1, 2), (3, 4)), 0)
    k, coalesced = pair_diagnostics(tr, 1)
    assert k == 2 and coalesced[2, 3] and not coalesced[0, 2]
    k, coalesced = pair_diagnostics(tr, 3)
    assert k == 0 and coalesced[2, 3] and not coalesced[0, 1]


def test_inconsistent_trajectory_is_rejected():
    with pytest.raises(TrajectoryIntegrityError):
        trace_ancestry(hand_trajectory(prev=(0, 1, 0)), 2)
    traj = hand_trajectory()
    bad = SweepTrajectory(**{**traj.__dict__, "x_path": np.array([1, 2, 2, 4], np.int32)})
    with pytest.raises(TrajectoryIntegrityError):
        trace_ancestry(bad, 2)


def test_trace_requires_fixation_and_valid_n():
    traj = hand_trajectory()
    with pytest.raises(ValueError):
        trace_ancestry(traj, 5)
    lost = SweepTrajectory(**{**traj.__dict__, "x_path": np.array([1, 2, 3, 0], np.int32)})
    with pytest.raises(ValueError):
        trace_ancestry(lost, 2)


@pytest.mark.parametrize("seed", range(40))
def test_backward_trace_matches_forward_tracking(seed):
    traj = simulate_conditioned_sweep(Params(N=4, s=0.3, r=0.4), KernelStream(seed))
    tr = trace_ancestry(traj, 8)
    origin, lastb, coal = forward_ancestry(
        traj.victim.tolist(), traj.parent.tolist(), traj.source.tolist(), traj.initial_mutant, 8, 8
    )
    assert tr.ancestor_at_0.tolist() == origin.tolist()
    assert tr.escape_time.tolist() == lastb.tolist()
    assert tr.coalescence_time.tolist() == coal.tolist()
    G = tr.coalescence_time
    assert np.array_equal(G, G.T)
    for i in range(8):
        for j in range(8):
            if i != j and tr.ancestor_at_0[i] == tr.ancestor_at_0[j]:
                assert G[i, j] >= 0


def test_no_recombination_means_no_escape():
    for seed in range(5):
        traj = simulate_conditioned_sweep(Params(N=15, s=0.2, r=0.0), KernelStream(seed))
        tr = trace_ancestry(traj, 6)
        assert np.all(tr.ancestor_at_0 == traj.initial_mutant)
        assert np.all(tr.escape_time == NEVER)
        assert pair_diagnostics(tr, 1)[0] == 0
        assert theta_partition(tr) == MarkedPartition(6, ((1, 2, 3, 4, 5, 6),), 0)


def _trace(ancestors, mutant):
    n = len(ancestors)
    return AncestryTrace(
        sample_indices=np.arange(n), initial_mutant=mutant, ancestor_at_0=np.array(ancestors),
        escape_time=np.full(n, NEVER), coalescence_time=np.full((n, n), NEVER), tau=np.array([-1, 0]),
    )


def test_theta_partition_examples():
    assert theta_partition(_trace([7, 7, 9], 9)) == MarkedPartition(3, ((1, 2), (3,)), 1)
    assert theta_partition(_trace([4, 4, 4], 4)) == MarkedPartition(3, ((1, 2, 3),), 0)
    assert theta_partition(_trace([1, 2, 3], 0)) == MarkedPartition(3, ((1,), (2,), (3,)), None)


def test_pair_outcomes_and_stats():
    assert pair_outcome([5, 5], 5) == 0
    assert pair_outcome([5, 2], 5) == 1
    assert pair_outcome([1, 2], 5) == 2
    assert pair_outcome([2, 2], 5) == 3
    traces = [_trace(a, 5) for a in ([5, 5], [5, 2], [1, 2], [2, 2])]
    ps = pair_stats_from_traces(traces)
    assert ps.values() == (0.625, 0.25, 0.25, 0.25)
    assert ps.n_reps == 4
    assert abs(ps.identity_residual()) < 1e-15
    with pytest.raises(ValueError):
        pair_stats_from_traces([])
    with pytest.raises(ValueError):
        pair_stats_from_traces([_trace([1, 2, 3], 5)])


def test_pair_stats_zero_without_recombination():
    traces = [trace_ancestry(simulate_conditioned_sweep(Params(N=10, s=0.3, r=0.0), KernelStream(i)), 2) for i in range(5)]
    assert pair_stats_from_traces(traces).values() == (0.0, 0.0, 0.0, 0.0)


def test_pair_stats_standard_errors():
    ps = PairStats.from_counts(600, 200, 100, 100)
    assert ps.p1B1b == 0.2
    assert ps.se[3] == pytest.approx(np.sqrt(0.2 * 0.8 / 1000))
    y = np.repeat([0.0, 0.5, 1.0, 1.0], [600, 200, 100, 100])
    assert ps.pinb == pytest.approx(y.mean())
    assert ps.se[0] == pytest.approx(y.std() / np.sqrt(1000))
    with pytest.raises(ValueError):
        PairStats.from_counts(0, 0, 0, 0)


def test_one_step_tally_counts_every_proposal():
    params = Params(N=5, s=0.3, r=0.2)
    tally = OneStepTally.empty(10)
    steps = 0
    for i in range(20):
        traj = simulate_conditioned_sweep(params, KernelStream(i))
        tally.add(traj)
        steps += traj.n_steps
    assert tally.steps.sum() == steps
    assert tally.steps[0].sum() == 0 and tally.steps[10].sum() == 0
    est, se, n = tally.frequency("BB", 4, 5)
    assert n == tally.steps[4, 2] and 0 <= est <= 1
    other = OneStepTally.empty(10)
    other.merge(tally)
    assert np.array_equal(other.events, tally.events)
