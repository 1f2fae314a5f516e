import math

import numpy as np
import pytest

from conftest import within_se
from oracles import replay_counts
from sweeplab.analytics import fixation_prob
from sweeplab.model import Params, SweepWorkspace, run_in_workspace, simulate_conditioned_sweep, simulate_sweep, validate_params
from sweeplab.rng import KernelStream


def test_validate_accepts_table_parameters():
    p = validate_params(10_000, 0.1, 0.00106, 2, 1)
    assert p == Params(10_000, 0.1, 0.00106, 2, 1)
    assert p.two_n == 20_000


@pytest.mark.parametrize(
    "args, message",
    [
        ((10, 0, 0, 1), "s must lie in (0,1)"),
        ((10, 1.0, 0, 1), "s must lie in (0,1)"),
        ((10, 0.5, 0.1, 21), "n exceeds 2N"),
        ((0, 0.5, 0.1, 1), "N must be a positive integer"),
        ((10, 0.5, 1.0, 1), "r must lie in [0,1)"),
        ((10, 0.5, -0.1, 1), "r must lie in [0,1)"),
        ((10, 0.5, 0.1, 0), "n must be a positive integer"),
    ],
)
def test_validate_rejects(args, message):
    with pytest.raises(ValueError) as err:
        validate_params(*args)
    assert message in str(err.value)


def test_validate_rejects_bad_seed():
    with pytest.raises(ValueError, match="seed"):
        validate_params(10, 0.5, 0.1, 1, seed=-3)


def _check_trajectory(traj):
    two_n = traj.params.two_n
    x = traj.x_path
    assert x[0] == 1
    assert np.all(np.abs(np.diff(x)) <= 1)
    assert x[-1] in (0, two_n)
    assert traj.fixed == (x[-1] == two_n)
    assert replay_counts(traj.victim, traj.parent, traj.victim_prev_allele, traj.initial_mutant, two_n) == list(x)
    assert traj.level_counts.sum() == traj.n_steps
    assert traj.n_steps >= traj.n_events
    assert np.all((traj.source >= -1) & (traj.source < two_n))


@pytest.mark.parametrize("seed", range(20))
def test_unconditioned_runs_are_consistent(seed):
    traj = simulate_sweep(Params(N=5, s=0.3, r=0.2), KernelStream(seed))
    _check_trajectory(traj)


def test_conditioned_run_fixes():
    for seed in range(10):
        traj = simulate_conditioned_sweep(Params(N=20, s=0.2, r=0.05), KernelStream(seed))
        _check_trajectory(traj)
        assert traj.fixed and traj.x_path[-1] == 40
        tau = traj.hitting_times()
        assert tau[1] == 0 and np.all(np.diff(tau[1:]) > 0)
        assert traj.tau(40) == traj.n_events


def test_no_recombination_when_r_is_zero():
    traj = simulate_conditioned_sweep(Params(N=10, s=0.3, r=0.0), KernelStream(4))
    assert not traj.recombined.any()
    assert np.array_equal(traj.neutral_ancestor, traj.parent)


def test_same_seed_same_events():
    a = simulate_conditioned_sweep(Params(N=30, s=0.2, r=0.1), KernelStream(9, 1))
    b = simulate_conditioned_sweep(Params(N=30, s=0.2, r=0.1), KernelStream(9, 1))
    for name in ("victim", "parent", "source", "victim_prev_allele", "x_path", "level_counts"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    assert a.initial_mutant == b.initial_mutant and a.attempts == b.attempts


def test_fixation_frequency_small_population():
    params = Params(N=2, s=0.5, r=0.0)
    ws = SweepWorkspace(4)
    reps = 20_000
    fixed = 0
    for i in range(reps):
        _, _, nev, _ = run_in_workspace(params, KernelStream(11, i), ws, conditioned=False)
        fixed += ws.xpath[nev] == 4
    expected = 0.5 / (1 - 0.5**4)
    assert math.isclose(expected, 0.5333, abs_tol=1e-4)
    assert math.isclose(fixation_prob(2, 0.5), expected)
    p = fixed / reps
    assert within_se(p, expected, math.sqrt(expected * (1 - expected) / reps))


def test_step_law_and_jump_chain():
    N, s = 10, 0.2
    two_n = 2 * N
    params = Params(N=N, s=s, r=0.0)
    ws = SweepWorkspace(two_n)
    tallies = np.zeros((3, two_n + 1), np.int64)
    for i in range(4000):
        run_in_workspace(params, KernelStream(21, i), ws, conditioned=False)
        tallies += ws.tallies
    steps = tallies.sum(axis=0)
    for k in (1, 5, 10, 15):
        up_prob = k * (two_n - k) / two_n**2
        for row, prob in ((0, up_prob), (1, up_prob * (1 - s))):
            est = tallies[row, k] / steps[k]
            assert within_se(est, prob, math.sqrt(prob * (1 - prob) / steps[k]))
    ups, downs = tallies[0].sum(), tallies[1].sum()
    jumps = ups + downs
    assert jumps > 100_000
    frac = ups / jumps
    target = 1 / (2 - s)
    assert within_se(frac, target, math.sqrt(target * (1 - target) / jumps))


def test_mean_attempts_near_reciprocal_fixation():
    params = Params(N=500, s=0.1, r=0.0)
    ws = SweepWorkspace(1000)
    attempts = [run_in_workspace(params, KernelStream(5, i), ws)[3] for i in range(1000)]
    expected = (1 - 0.9**1000) / 0.1
    assert abs(np.mean(attempts) - expected) < 1.0


def test_workspace_grows_without_losing_events():
    params = Params(N=50, s=0.1, r=0.1)
    small = SweepWorkspace(100, capacity=8)
    big = SweepWorkspace(100)
    a = run_in_workspace(params, KernelStream(3), small)
    b = run_in_workspace(params, KernelStream(3), big)
    assert a == b
    nev = a[2]
    assert small.capacity >= nev
    assert np.array_equal(small.victim[:nev], big.victim[:nev])
    assert np.array_equal(small.xpath[: nev + 1], big.xpath[: nev + 1])
