import math
from fractions import Fraction

import numpy as np
import pytest

from oracles import conditioned_occupancy, enumerate_one_step, hitting_prob_linear, msh_direct, rk4_logistic
from sweeplab.analytics import (
    beta_k,
    expected_jump_counts,
    fixation_prob,
    harmonic_tail,
    hitting_prob,
    logistic_frequency,
    msh_frequency,
    one_step_coal_probs,
    one_step_recomb_probs,
    q_J_value,
)


def test_hitting_prob_examples():
    assert hitting_prob(0, 2, 1, 0.1) == pytest.approx(1 / 1.9)
    assert round(hitting_prob(0, 2, 1, 0.1), 6) == 0.526316
    assert hitting_prob(3, 11, 7, 1e-8) == pytest.approx(0.5, abs=1e-6)
    assert hitting_prob(0, 20_000, 1, 0.1) == pytest.approx(0.1 / (1 - 0.9**20_000))
    assert fixation_prob(10_000, 0.1) == hitting_prob(0, 20_000, 1, 0.1)


@pytest.mark.parametrize("a, b, k", [(0, 20, 1), (0, 20, 13), (4, 17, 5), (2, 9, 8)])
def test_hitting_prob_matches_linear_solve(a, b, k):
    assert hitting_prob(a, b, k, 0.3) == pytest.approx(hitting_prob_linear(20, 0.3, a, b, k), rel=1e-12)


def test_hitting_prob_monotone_and_errors():
    vals = [hitting_prob(0, 30, k, 0.2) for k in range(1, 30)]
    assert all(x < y for x, y in zip(vals, vals[1:]))
    vals = [hitting_prob(0, b, 3, 0.2) for b in range(4, 30)]
    assert all(x > y for x, y in zip(vals, vals[1:]))
    for bad in [(5, 3, 4), (0, 5, 5), (0, 5, 0)]:
        with pytest.raises(ValueError):
            hitting_prob(*bad, 0.2)
    assert 0 < hitting_prob(0, 10**7, 1, 0.5) <= 1


def test_harmonic_tail_and_q_J():
    assert harmonic_tail(3, 7) == pytest.approx(float(sum(Fraction(1, k) for k in range(4, 8))), rel=1e-15)
    assert q_J_value(10, 20, 0.01, 0.1) == 0.0
    assert q_J_value(10, 1, 0.0, 0.1) == 0.0
    # harmonic number by its Euler-Maclaurin expansion, independent of direct summation
    n = 20_000
    h = math.log(n) + 0.5772156649015329 + 1 / (2 * n) - 1 / (12 * n**2) - 1
    assert q_J_value(10_000, 1, 0.00106, 0.1) == pytest.approx(-math.expm1(-0.0106 * h), rel=1e-12)
    assert round(q_J_value(10_000, 1, 0.00106, 0.1), 5) == 0.09561
    qs = [q_J_value(500, J, 0.002, 0.1) for J in range(1, 1001, 50)]
    assert all(x > y for x, y in zip(qs, qs[1:]))
    assert q_J_value(500, 5, 0.003, 0.1) > q_J_value(500, 5, 0.002, 0.1)


def test_jump_count_boundaries():
    ex = expected_jump_counts(10, 0.3, 19, 1)
    assert ex.q_k == pytest.approx(1.0) and ex.EU == pytest.approx(1.0)
    assert expected_jump_counts(10, 0.3, 1, 1).ED == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        expected_jump_counts(10, 0.3, 20, 1)
    for k in range(1, 20):
        ex = expected_jump_counts(10, 0.3, k, 4)
        assert ex.q_k >= 0.3 - 1e-12 and 0 <= ex.r_kj <= 1
        assert min(ex.EU, ex.ED, ex.EH) >= 0
        assert ex.beta_k == pytest.approx(k * (20 - k) / (k * k + (20 - k) ** 2 + 0.3 * k * (20 - k)))


@pytest.mark.parametrize("j", [1, 4, 12])
def test_jump_counts_match_greens_function(j):
    EU, ED, EH = conditioned_occupancy(20, 0.3, start=j)
    for k in range(1, 20):
        ex = expected_jump_counts(10, 0.3, k, j)
        assert (ex.EU, ex.ED, ex.EH) == pytest.approx((EU[k], ED[k], EH[k]), rel=1e-9, abs=1e-12)


def test_one_step_examples():
    assert one_step_recomb_probs(5, 0.1, 0.3, 4, 5)[0] == pytest.approx(0.012)
    assert one_step_recomb_probs(5, 0.1, 0.3, 4, 3)[0] == 0.0
    assert one_step_recomb_probs(5, 0.1, 0.3, 4, 5)[1] == 0.0
    assert one_step_coal_probs(5, 0.1, 0.3, 4, 3)[0] == 0.0
    assert one_step_coal_probs(5, 0.1, 0.3, 4, 5)[1] == 0.0
    for k in range(1, 10):
        assert one_step_coal_probs(5, 0.0, 0.3, k, k + 1)[0] == pytest.approx(2 / (k * (k + 1)))
        for l in (k - 1, k, k + 1):
            if l < 1:
                continue
            assert one_step_recomb_probs(5, 0.0, 0.3, k, l) == (0.0, 0.0)
            assert one_step_coal_probs(5, 0.0, 0.3, k, l)[2] == 0.0
            for v in one_step_recomb_probs(5, 0.4, 0.3, k, l) + one_step_coal_probs(5, 0.4, 0.3, k, l):
                assert 0.0 <= v <= 1.0
    p = one_step_recomb_probs(5, 0.1, 0.3, 4, 4)
    assert p[0] == p[1] == pytest.approx(0.1 * beta_k(5, 0.3, 4) / 10)
    for bad in [(0, 1), (4, 6), (10, 10), (4, 0)]:
        with pytest.raises(ValueError):
            one_step_recomb_probs(5, 0.1, 0.3, *bad)
        with pytest.raises(ValueError):
            one_step_coal_probs(5, 0.1, 0.3, *bad)


def _pairs_exist(two_n, l):
    return {"pB": l >= 1, "pb": two_n - l >= 1, "BB": l >= 2, "bb": two_n - l >= 2, "Bb": 0 < l < two_n}


def test_one_step_matches_enumeration_at_centre():
    got = enumerate_one_step(20, 0.05, 0.2, 10, 10)
    want = one_step_recomb_probs(10, 0.05, 0.2, 10, 10) + one_step_coal_probs(10, 0.05, 0.2, 10, 10)
    assert [got[key] for key in ("pB", "pb", "BB", "bb", "Bb")] == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("k", [1, 2, 5, 9, 13, 18, 19])
def test_one_step_matches_enumeration_grid(k):
    for l in (k - 1, k, k + 1):
        if l < 1:
            continue
        got = enumerate_one_step(20, 0.05, 0.2, k, l)
        want = dict(zip(("pB", "pb", "BB", "bb", "Bb"),
                        one_step_recomb_probs(10, 0.05, 0.2, k, l) + one_step_coal_probs(10, 0.05, 0.2, k, l)))
        for key, exists in _pairs_exist(20, l).items():
            if exists:
                assert got[key] == pytest.approx(want[key], rel=1e-10, abs=1e-15), (k, l, key)


def test_msh_frequency():
    assert msh_frequency(0.5, 1e-4, 0.1, 0.0) == 0.0
    assert msh_frequency(0.5, 1.0, 0.1, 0.01) == 0.0
    got = msh_frequency(0.5, 1e-4, 0.1, 0.01)
    assert abs(got - msh_direct(0.5, 1e-4, 0.1, 0.01)) < 1e-10
    assert 0 < got < 0.5


def test_logistic_frequency():
    assert logistic_frequency(0.2, 0.1, 0.0) == pytest.approx(0.2)
    assert logistic_frequency(0.2, 0.1, 1e4) == pytest.approx(1.0)
    t = 50 / 0.1
    assert abs(logistic_frequency(1e-3, 0.1, t) - rk4_logistic(1e-3, 0.1, t)) < 1e-6
    ts = np.linspace(0, 100, 5)
    assert np.allclose(logistic_frequency(0.3, 0.05, ts), [logistic_frequency(0.3, 0.05, x) for x in ts])
