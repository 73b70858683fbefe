"""Bounded RTDP: an anytime planner keeping monotone lower/upper bounds on
the optimal cost-to-go.

The planner recommends actions greedily on the *upper* bound, so with a
monotone upper-bound heuristic the recommendation's expected cost never
exceeds the current upper bound.  Thinking cycles run a fixed number of
trials from the agent's current state and record how much each upper-bound
Q-value dropped; those drops feed the value-of-computation estimators.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .mdp import BaseMdp

DEFAULT_TRIAL_LEN = 50


class DropHistory:
    """Per-(state, action) upper-bound Q drops from the most recent
    thinking cycle.

    ``has_record`` marks states the agent has information about: either the
    planner changed one of the state's upper-bound Q-values in some cycle,
    or the state was watched by a cycle (the cycle's start state and its
    NOP-successors).  A state with no record gives the drop model nothing
    to project from, which forces a Think decision upstream.  Once a state
    is recorded, a drop of 0 from the latest cycle is information too.
    """

    def __init__(self, state_count, action_count):
        self.action_count = action_count
        self.last_drop = np.zeros(state_count * action_count)
        self.has_record = np.zeros(state_count, dtype=bool)

    def drop(self, s, a):
        """Drop for (s, a) from the latest cycle, or None if the agent has
        no record for this state yet."""
        if not self.has_record[s]:
            return None
        return float(self.last_drop[s * self.action_count + a])

    def drop_or_zero(self, s, a):
        return float(self.last_drop[s * self.action_count + a])

    def has(self, s, a):
        return bool(self.has_record[s])

    def mark_state(self, s):
        """Record a watched state, movement or not."""
        self.has_record[s] = True


class BoundsState:
    """BRTDP's paired bounds plus visit bookkeeping.

    Single-owner mutable: one instance per episode.  The bound arrays are
    only ever tightened; ``monotone_violations`` counts any backup that
    tried to loosen a bound beyond floating-point noise (must stay 0 for
    monotone initializations).
    """

    def __init__(self, m: BaseMdp, lower, upper):
        lower = np.asarray(lower, dtype=np.float64).copy()
        upper = np.asarray(upper, dtype=np.float64).copy()
        if lower.shape != (m.state_count,) or upper.shape != (m.state_count,):
            raise ValueError("bound arrays must have one entry per state")
        if (lower > upper + 1e-9).any():
            bad = int(np.flatnonzero(lower > upper + 1e-9)[0])
            raise ValueError(f"lower bound exceeds upper bound at state {bad}")
        if lower[m.goal_state] != 0.0 or upper[m.goal_state] != 0.0:
            raise ValueError("both bounds must be 0 at the goal state")
        self.mdp = m
        self.lower = lower
        self.upper = upper
        self.trial_count = 0
        self.touched = np.zeros(m.state_count, dtype=bool)
        self.drops = DropHistory(m.state_count, m.action_count)
        self._stats = np.zeros(2, dtype=np.int64)
        self._q_cache = _q_flat(m, self.upper)

    @property
    def monotone_violations(self):
        return int(self._stats[0])

    @property
    def steps_simulated(self):
        return int(self._stats[1])


def _q_flat(m: BaseMdp, values):
    """Flat pair-indexed upper-bound Q table (inf on disabled pairs)."""
    out = np.empty(m.state_count * m.action_count)
    _kernels.q_table_flat(m.trans_indptr, m.trans_succ, m.trans_prob,
                          m.cost, m.enabled, m.action_count, values, out)
    return out


def init_planner(m: BaseMdp, lower, upper) -> BoundsState:
    """Fresh planner state from (monotone) heuristic bounds."""
    return BoundsState(m, lower, upper)


def q_upper(b: BoundsState, m: BaseMdp, s, a):
    """Upper-bound Q by one-step lookahead over the upper value bound."""
    if not m.is_enabled(s, a):
        raise ValueError(f"action {a} is not enabled in state {s}")
    return float(_kernels.q_lookahead(
        m.trans_indptr, m.trans_succ, m.trans_prob, m.cost,
        m.action_count, b.upper, s, a))


def q_lower(b: BoundsState, m: BaseMdp, s, a):
    if not m.is_enabled(s, a):
        raise ValueError(f"action {a} is not enabled in state {s}")
    return float(_kernels.q_lookahead(
        m.trans_indptr, m.trans_succ, m.trans_prob, m.cost,
        m.action_count, b.lower, s, a))


def recommended_action(b: BoundsState, m: BaseMdp, s):
    """Greedy non-NOP action on the upper bound (ties: lowest index).
    Falls back to NOP in states where nothing else is enabled."""
    a = _kernels.greedy_action(
        m.trans_indptr, m.trans_succ, m.trans_prob, m.cost, m.enabled,
        m.action_count, b.upper, s, m.nop_action)
    return int(a) if a >= 0 else m.nop_action


def run_trial(b: BoundsState, m: BaseMdp, s_start, rng,
              max_len=DEFAULT_TRIAL_LEN):
    """One trial from s_start; returns the number of steps walked."""
    steps = _kernels.run_trial(
        m.trans_indptr, m.trans_succ, m.trans_prob, m.cost, m.enabled,
        m.action_count, m.goal_state, m.nop_action,
        b.lower, b.upper, b.touched, s_start, max_len, rng.state, b._stats)
    b.trial_count += 1
    return int(steps)


def nop_successors(m: BaseMdp, s):
    return [succ for succ, _ in m.support(s, m.nop_action)]


def thinking_cycle(b: BoundsState, m: BaseMdp, s, rng, k_trials=1,
                   trial_len=DEFAULT_TRIAL_LEN):
    """One NOP's worth of planning: run k trials from s, then diff the full
    upper-bound Q table against its pre-cycle snapshot.

    Recording is global because a trial's backups move Q-values everywhere
    along its path: a state gains a record the first time the planner
    changes any of its Q-values, and drop records always describe the most
    recent cycle (0 for pairs the cycle left alone)."""
    before = b._q_cache
    for _ in range(k_trials):
        run_trial(b, m, s, rng, max_len=trial_len)
    after = _q_flat(m, b.upper)
    drops = before - after
    np.clip(drops, 0.0, None, out=drops)
    b.drops.last_drop = drops
    changed = drops.reshape(m.state_count, m.action_count).max(axis=1) > 0.0
    b.drops.has_record |= changed
    # a cycle run from s observes s's drops even when nothing moved (the
    # bounds there may simply be tight already), so the start state and the
    # states NOP can lead to from it always count as fully recorded
    b.drops.mark_state(s)
    for succ in nop_successors(m, s):
        b.drops.mark_state(succ)
    b._q_cache = after
