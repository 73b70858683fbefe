"""Numba kernels for the hot paths: trial rollouts, bound lookaheads, and
the closed-form two-segment recommendation estimators.

All kernels work on the flat MDP arrays (trans_indptr / trans_succ /
trans_prob / cost / enabled with pair index s * A + a) so the same code
backs both the object API and the experiment loops.
"""

import numpy as np
from numba import njit

# SplitMix64: tiny, fast, and fully deterministic across platforms.
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / 9007199254740992.0


@njit(cache=True)
def rng_next(state):
    state[0] = state[0] + _GOLDEN
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def rng_uniform(state):
    return float(rng_next(state) >> np.uint64(11)) * _INV_2_53


@njit(cache=True)
def sample_successor(indptr, succ, prob, A, s, a, state):
    u = rng_uniform(state)
    lo = indptr[s * A + a]
    hi = indptr[s * A + a + 1]
    acc = 0.0
    for k in range(lo, hi):
        acc += prob[k]
        if u < acc:
            return succ[k]
    return succ[hi - 1]


@njit(cache=True)
def q_lookahead(indptr, succ, prob, cost, A, values, s, a):
    k = s * A + a
    q = cost[k]
    for i in range(indptr[k], indptr[k + 1]):
        q += prob[i] * values[succ[i]]
    return q


@njit(cache=True)
def q_table_flat(indptr, succ, prob, cost, enabled, A, values, out):
    """Fill ``out`` (flat pair-indexed) with one-step lookahead Q-values on
    ``values``; disabled pairs get 0."""
    n_pairs = out.shape[0]
    for k in range(n_pairs):
        if not enabled[k]:
            out[k] = 0.0
            continue
        q = cost[k]
        for i in range(indptr[k], indptr[k + 1]):
            q += prob[i] * values[succ[i]]
        out[k] = q


@njit(cache=True)
def backup_value(indptr, succ, prob, cost, enabled, A, values, s, skip):
    """min over enabled actions of the one-step lookahead, skipping action
    index ``skip`` (pass -1 to consider all) unless nothing else is
    enabled."""
    best = np.inf
    for a in range(A):
        if a != skip and enabled[s * A + a]:
            q = q_lookahead(indptr, succ, prob, cost, A, values, s, a)
            if q < best:
                best = q
    if best == np.inf and skip >= 0 and enabled[s * A + skip]:
        best = q_lookahead(indptr, succ, prob, cost, A, values, s, skip)
    return best


@njit(cache=True)
def greedy_action(indptr, succ, prob, cost, enabled, A, values, s, skip):
    """argmin over enabled actions, skipping action index ``skip`` (pass -1
    to consider all); ties go to the lowest index."""
    best_a = -1
    best_q = np.inf
    for a in range(A):
        if a == skip or not enabled[s * A + a]:
            continue
        q = q_lookahead(indptr, succ, prob, cost, A, values, s, a)
        if q < best_q:
            best_q = q
            best_a = a
    return best_a


@njit(cache=True)
def run_trial(indptr, succ, prob, cost, enabled, A, goal, nop,
              lower, upper, touched, s_start, max_len, state, stats):
    """One BRTDP trial: walk greedily on the lower bound, sample successors
    proportionally to probability-weighted bound gaps, then back up both
    bounds over the visited states in reverse order.

    The planner prices the acting problem, so trials and backups skip the
    NOP action wherever any other action is enabled (thinking is scheduled
    one level up, not planned as a world move).

    ``stats``: int64 array; [0] counts monotonicity violations beyond fp
    noise, [1] accumulates visited steps.
    """
    path = np.empty(max_len, dtype=np.int64)
    s = s_start
    t = 0
    while t < max_len and s != goal:
        path[t] = s
        t += 1
        a = greedy_action(indptr, succ, prob, cost, enabled, A, lower, s, nop)
        if a < 0:
            a = nop
        lo = indptr[s * A + a]
        hi = indptr[s * A + a + 1]
        total = 0.0
        for k in range(lo, hi):
            total += prob[k] * (upper[succ[k]] - lower[succ[k]])
        if total <= 1e-13:
            pick = lo + int(rng_uniform(state) * (hi - lo))
            if pick >= hi:
                pick = hi - 1
            s = succ[pick]
        else:
            u = rng_uniform(state) * total
            acc = 0.0
            nxt = succ[hi - 1]
            for k in range(lo, hi):
                acc += prob[k] * (upper[succ[k]] - lower[succ[k]])
                if u < acc:
                    nxt = succ[k]
                    break
            s = nxt
    for i in range(t - 1, -1, -1):
        x = path[i]
        u_new = backup_value(indptr, succ, prob, cost, enabled, A, upper, x, nop)
        l_new = backup_value(indptr, succ, prob, cost, enabled, A, lower, x, nop)
        if u_new > upper[x] + 1e-9 or l_new < lower[x] - 1e-9:
            stats[0] += 1
        if u_new < upper[x]:
            upper[x] = u_new
        if l_new > lower[x]:
            lower[x] = l_new
        if lower[x] > upper[x]:
            lower[x] = upper[x]
        touched[x] = True
    stats[1] += t
    return t


@njit(cache=True)
def uncorrelated_two(h1, d1, h2, d2):
    """Recommendation probabilities and conditional means for two projected
    bounds drawn independently and uniformly from [h - d, h].

    Returns (p1, e1, p2, e2).  Ties on coinciding point masses go to the
    first segment.  A segment with zero winning probability reports its
    unconditional mean.
    """
    a1 = h1 - d1
    a2 = h2 - d2
    if d1 <= 0.0 and d2 <= 0.0:
        if h2 < h1:
            return 0.0, h1, 1.0, h2
        return 1.0, h1, 0.0, h2
    if d1 <= 0.0:
        # point mass vs uniform
        frac = (h2 - h1) / d2
        if frac < 0.0:
            frac = 0.0
        elif frac > 1.0:
            frac = 1.0
        p1 = frac
        p2 = 1.0 - p1
        top = h1 if h1 < h2 else h2
        e2 = 0.5 * (a2 + top) if p2 > 0.0 else h2 - 0.5 * d2
        return p1, h1, p2, e2
    if d2 <= 0.0:
        frac = (h1 - h2) / d1
        if frac < 0.0:
            frac = 0.0
        elif frac > 1.0:
            frac = 1.0
        p2 = frac
        p1 = 1.0 - p2
        top = h2 if h2 < h1 else h1
        e1 = 0.5 * (a1 + top) if p1 > 0.0 else h1 - 0.5 * d1
        return p1, e1, p2, h2

    p1, n1 = _win_integral(a1, h1, d1, a2, h2, d2)
    p2, n2 = _win_integral(a2, h2, d2, a1, h1, d1)
    e1 = n1 / p1 if p1 > 0.0 else h1 - 0.5 * d1
    e2 = n2 / p2 if p2 > 0.0 else h2 - 0.5 * d2
    norm = p1 + p2
    if norm > 0.0:
        p1 /= norm
        p2 /= norm
    return p1, e1, p2, e2


@njit(cache=True)
def _win_integral(a1, b1, w1, a2, b2, w2):
    """P(X1 < X2) and E[X1; X1 < X2] for X1~U[a1,b1], X2~U[a2,b2]."""
    p = 0.0
    n = 0.0
    # region where X2 is surely above: x in [a1, min(b1, a2)]
    lo = a1
    hi = b1 if b1 < a2 else a2
    if hi > lo:
        p += (hi - lo) / w1
        n += (hi * hi - lo * lo) / (2.0 * w1)
    # overlap region: survival of X2 is (b2 - x) / w2
    lo = a1 if a1 > a2 else a2
    hi = b1 if b1 < b2 else b2
    if hi > lo:
        p += (b2 * (hi - lo) - (hi * hi - lo * lo) / 2.0) / (w1 * w2)
        n += (b2 * (hi * hi - lo * lo) / 2.0 - (hi ** 3 - lo ** 3) / 3.0) / (w1 * w2)
    return p, n


@njit(cache=True)
def correlated_two(h1, d1, h2, d2):
    """Recommendation probabilities and conditional means under the shared
    drop-fraction model: both bounds slide as h - rho * d with a single
    rho ~ U[0, 1].

    Returns (p1, e1, p2, e2); identical lines give all mass to the first
    segment.
    """
    dh = h1 - h2
    dd = d1 - d2
    if dh == 0.0 and dd == 0.0:
        return 1.0, h1 - 0.5 * d1, 0.0, h2 - 0.5 * d2
    # segment 1 wins where dh - dd * rho < 0 on [0, 1]
    if dd == 0.0:
        lo1, hi1 = (0.0, 1.0) if dh < 0.0 else (0.0, 0.0)
    else:
        r = dh / dd
        if dd > 0.0:
            lo1 = r if r > 0.0 else 0.0
            hi1 = 1.0
            if lo1 > 1.0:
                lo1 = hi1 = 1.0
        else:
            lo1 = 0.0
            hi1 = r if r < 1.0 else 1.0
            if hi1 < 0.0:
                lo1 = hi1 = 0.0
    p1 = hi1 - lo1
    p2 = 1.0 - p1
    e1 = h1 - d1 * 0.5 * (lo1 + hi1) if p1 > 0.0 else h1 - 0.5 * d1
    if p2 > 0.0:
        # complement of [lo1, hi1] in [0, 1] is a single interval here
        if lo1 > 0.0:
            c_lo, c_hi = 0.0, lo1
        else:
            c_lo, c_hi = hi1, 1.0
        e2 = h2 - d2 * 0.5 * (c_lo + c_hi)
    else:
        e2 = h2 - 0.5 * d2
    return p1, e1, p2, e2
