"""Hot loops of the Moran sweep: forward simulation, backward tracing, replay."""
import numpy as np

from ._jit import njit
from .rng import bounded_from_u32, next_double, next_u64, rejection_threshold

ABSORBED = 0
BUFFER_FULL = 1

UP, DOWN, HOLD = 0, 1, 2


@njit(cache=True)
def advance_sweep(
    state, two_n, s, r, alleles, x, nsteps, victim, parent, source, prev, xpath, nev, tallies
):
    """Run proposals until X hits 0 or 2N, or the event buffers are full.

    Only accepted replacements are written. ``tallies[d, k]`` counts proposals
    made at level ``k`` that moved X up, down, or left it in place (rejections
    included). Returns ``(status, x, nsteps, nev)``.
    """
    m = np.uint64(two_n)
    thr = rejection_threshold(m)
    cap = victim.shape[0]
    shift = np.uint64(32)
    lo = np.uint64(0xFFFFFFFF)
    while True:
        if x == 0 or x == two_n:
            return ABSORBED, x, nsteps, nev
        if nev >= cap:
            return BUFFER_FULL, x, nsteps, nev
        w = next_u64(state)
        v = bounded_from_u32(state, w >> shift, m, thr)
        p = bounded_from_u32(state, w & lo, m, thr)
        u = next_double(state)
        nsteps += 1
        av = alleles[v]
        ap = alleles[p]
        if av == 1 and ap == 0:
            if u < s:
                tallies[HOLD, x] += 1
                continue
            u = (u - s) / (1.0 - s)
        src = -1
        if u < r:
            src = bounded_from_u32(state, next_u64(state) >> shift, m, thr)
        victim[nev] = v
        parent[nev] = p
        source[nev] = src
        prev[nev] = av
        alleles[v] = ap
        if ap > av:
            tallies[UP, x] += 1
            x += 1
        elif ap < av:
            tallies[DOWN, x] += 1
            x -= 1
        else:
            tallies[HOLD, x] += 1
        nev += 1
        xpath[nev] = x


@njit(cache=True)
def trace_lineages(victim, parent, source, prev, xpath, n_events, two_n, initial_mutant, n):
    """Follow the neutral-site ancestry of individuals ``0..n-1`` back to time 0.

    Times are event counts: time ``t`` is the state after ``t`` accepted events.
    Returns ``(bad, ancestor0, escape, coal)`` where ``bad`` is -1 for a
    consistent trajectory, the failing event time otherwise, or -2 when the
    reconstructed time-0 population is not a single mutant.
    """
    alleles = np.ones(two_n, dtype=np.int8)
    pos = np.arange(n)
    occ = np.zeros(two_n, dtype=np.int32)
    for i in range(n):
        occ[i] += 1
    escape = np.full(n, -1, dtype=np.int64)
    coal = np.full((n, n), -1, dtype=np.int64)
    moved = np.zeros(n, dtype=np.bool_)
    for t in range(n_events, 0, -1):
        e = t - 1
        v = victim[e]
        p = parent[e]
        pv = prev[e]
        now = alleles[v]
        expected = pv if p == v else alleles[p]
        if now != expected or xpath[t] - xpath[t - 1] != now - pv:
            return t, pos, escape, coal
        alleles[v] = pv
        if occ[v] == 0:
            continue
        a = source[e] if source[e] >= 0 else p
        if a != v:
            for i in range(n):
                moved[i] = pos[i] == v
            if occ[a] > 0:
                for i in range(n):
                    if moved[i]:
                        for j in range(n):
                            if pos[j] == a and coal[i, j] < 0:
                                coal[i, j] = t - 1
                                coal[j, i] = t - 1
            for i in range(n):
                if moved[i]:
                    pos[i] = a
            occ[a] += occ[v]
            occ[v] = 0
        if alleles[a] == 0:
            for i in range(n):
                if pos[i] == a and escape[i] < 0:
                    escape[i] = t - 1
    total = 0
    for i in range(two_n):
        total += alleles[i]
    if total != 1 or alleles[initial_mutant] != 1 or xpath[0] != 1:
        return -2, pos, escape, coal
    return -1, pos, escape, coal


@njit(cache=True)
def replay_one_step(victim, parent, source, n_events, two_n, initial_mutant, xpath):
    """Forward replay tallying one-step recombination and coalescence outcomes.

    ``counts[c, k, d]`` with ``d = l - k + 1`` for the step ``X: k -> l``:
    c=0 newborn B whose neutral source is b; c=1 newborn b with a B source;
    c=2/3/4 a BB / bb / Bb pair of time-t individuals sharing a time-(t-1)
    ancestor.
    """
    alleles = np.zeros(two_n, dtype=np.int8)
    alleles[initial_mutant] = 1
    counts = np.zeros((5, two_n + 1, 3), dtype=np.int64)
    for e in range(n_events):
        k = xpath[e]
        d = xpath[e + 1] - k + 1
        v = victim[e]
        p = parent[e]
        src = source[e]
        born = alleles[p]
        a = p
        if src >= 0:
            a = src
            if alleles[src] != born:
                if born == 1:
                    counts[0, k, d] += 1
                else:
                    counts[1, k, d] += 1
        if a != v:
            other = alleles[a]
            if born == 1 and other == 1:
                counts[2, k, d] += 1
            elif born == 0 and other == 0:
                counts[3, k, d] += 1
            else:
                counts[4, k, d] += 1
        alleles[v] = born
    return counts
