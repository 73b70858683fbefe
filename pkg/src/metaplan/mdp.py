"""Tabular stochastic shortest path (SSP) MDPs and exact solvers.

An SSP MDP is a tuple (S, A, T, C, s0, sg) with nonnegative costs, an
absorbing zero-cost goal, and a designated NOP action whose semantics
(stay in place, drift, ...) are left to the domain.  Transitions are
stored sparsely: only positive-probability edges are listed.

State and action spaces are flat integer ranges.  A value function is a
float array over states, a policy an int array of action indices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

PROB_TOL = 1e-9


class MdpStructureError(ValueError):
    """Malformed MDP input (bad indices, probabilities, costs)."""


class SolverDivergenceError(RuntimeError):
    """Value iteration hit the sweep cap without converging."""


class ImproperPolicyError(RuntimeError):
    """A policy fails to reach the goal with probability 1."""

    def __init__(self, trapped_state: int):
        self.trapped_state = trapped_state
        super().__init__(f"policy cannot reach the goal from state {trapped_state}")


@dataclass
class ValidationReport:
    is_ssp: bool
    proper_policy_found: bool
    messages: list[str] = field(default_factory=list)


class BaseMdp:
    """Sparse tabular SSP MDP.

    Transitions are kept in a CSR-like layout indexed by the flat pair
    ``s * action_count + a``: ``trans_indptr`` gives the slice of
    ``trans_succ`` / ``trans_prob`` holding the support of (s, a).
    A pair with empty support is a disabled action.
    """

    def __init__(self, state_count, action_count, nop_action, start_state,
                 goal_state, transitions, costs):
        """``transitions``: dict (s, a) -> list of (successor, probability).
        ``costs``: dict (s, a) -> cost; missing entries default to 0.
        """
        self.state_count = int(state_count)
        self.action_count = int(action_count)
        self.nop_action = int(nop_action)
        self.start_state = int(start_state)
        self.goal_state = int(goal_state)
        self._check_index(self.nop_action, self.action_count, "nop_action")
        self._check_index(self.start_state, self.state_count, "start_state")
        self._check_index(self.goal_state, self.state_count, "goal_state")

        n_pairs = self.state_count * self.action_count
        counts = np.zeros(n_pairs, dtype=np.int64)
        bad = []
        for (s, a), support in transitions.items():
            if not (0 <= s < self.state_count and 0 <= a < self.action_count):
                bad.append((s, a))
                continue
            counts[s * self.action_count + a] = len(support)
        if bad:
            raise MdpStructureError(f"transition entries with bad indices: {bad}")

        self.trans_indptr = np.zeros(n_pairs + 1, dtype=np.int64)
        np.cumsum(counts, out=self.trans_indptr[1:])
        nnz = int(self.trans_indptr[-1])
        self.trans_succ = np.zeros(nnz, dtype=np.int64)
        self.trans_prob = np.zeros(nnz, dtype=np.float64)
        for (s, a), support in transitions.items():
            k = self.trans_indptr[s * self.action_count + a]
            for succ, p in support:
                if not 0 <= succ < self.state_count:
                    bad.append((s, a, succ))
                    continue
                self.trans_succ[k] = succ
                self.trans_prob[k] = p
                k += 1
        if bad:
            raise MdpStructureError(f"successors with bad indices: {bad}")

        self.cost = np.zeros(n_pairs, dtype=np.float64)
        for (s, a), c in costs.items():
            if not (0 <= s < self.state_count and 0 <= a < self.action_count):
                raise MdpStructureError(f"cost entry with bad indices: {(s, a)}")
            self.cost[s * self.action_count + a] = c

        self.enabled = counts > 0
        for arr in (self.trans_indptr, self.trans_succ, self.trans_prob,
                    self.cost, self.enabled):
            arr.setflags(write=False)
        self._action_matrices = None

    @staticmethod
    def _check_index(i, n, name):
        if not 0 <= i < n:
            raise MdpStructureError(f"{name}={i} out of range [0, {n})")

    # -- accessors ---------------------------------------------------------

    def support(self, s, a):
        """List of (successor, probability) for (s, a)."""
        lo, hi = self._slice(s, a)
        return list(zip(self.trans_succ[lo:hi].tolist(),
                        self.trans_prob[lo:hi].tolist()))

    def _slice(self, s, a):
        k = s * self.action_count + a
        return int(self.trans_indptr[k]), int(self.trans_indptr[k + 1])

    def is_enabled(self, s, a):
        return bool(self.enabled[s * self.action_count + a])

    def cost_of(self, s, a):
        return float(self.cost[s * self.action_count + a])

    def enabled_actions(self, s):
        base = s * self.action_count
        return [a for a in range(self.action_count) if self.enabled[base + a]]

    def action_matrices(self):
        """Per-action sparse transition matrices (rows of disabled pairs are
        empty; callers must mask them via ``enabled``)."""
        if self._action_matrices is None:
            mats = []
            A = self.action_count
            for a in range(A):
                rows, cols, vals = [], [], []
                for s in range(self.state_count):
                    lo, hi = self._slice(s, a)
                    rows.extend([s] * (hi - lo))
                    cols.extend(self.trans_succ[lo:hi].tolist())
                    vals.extend(self.trans_prob[lo:hi].tolist())
                mats.append(sp.csr_matrix(
                    (vals, (rows, cols)),
                    shape=(self.state_count, self.state_count)))
            self._action_matrices = mats
        return self._action_matrices

    # -- serialization -----------------------------------------------------

    def to_json_dict(self):
        transitions = []
        costs = []
        for s in range(self.state_count):
            for a in range(self.action_count):
                lo, hi = self._slice(s, a)
                for k in range(lo, hi):
                    transitions.append(
                        [s, a, int(self.trans_succ[k]), float(self.trans_prob[k])])
                c = self.cost_of(s, a)
                if c != 0.0:
                    costs.append([s, a, c])
        return {
            "states": self.state_count,
            "actions": self.action_count,
            "nop": self.nop_action,
            "start": self.start_state,
            "goal": self.goal_state,
            "transitions": transitions,
            "costs": costs,
        }

    @classmethod
    def from_json_dict(cls, doc):
        transitions = {}
        for s, a, succ, p in doc["transitions"]:
            transitions.setdefault((s, a), []).append((succ, p))
        costs = {(s, a): c for s, a, c in doc.get("costs", [])}
        return cls(doc["states"], doc["actions"], doc["nop"], doc["start"],
                   doc["goal"], transitions, costs)

    def to_json(self):
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_json_dict(json.loads(text))


# -- validation ------------------------------------------------------------


def _predecessor_lists(m: BaseMdp):
    """For each state, the list of (s, a) pairs with that state in support."""
    preds = [[] for _ in range(m.state_count)]
    A = m.action_count
    for s in range(m.state_count):
        for a in range(A):
            lo, hi = m._slice(s, a)
            for k in range(lo, hi):
                preds[m.trans_succ[k]].append((s, a))
    return preds


def _positive_reach(m: BaseMdp, allowed, preds):
    """States that can reach the goal with positive probability using only
    action pairs marked in ``allowed``."""
    in_reach = np.zeros(m.state_count, dtype=bool)
    in_reach[m.goal_state] = True
    queue = [m.goal_state]
    A = m.action_count
    while queue:
        t = queue.pop()
        for s, a in preds[t]:
            if allowed[s * A + a] and not in_reach[s]:
                in_reach[s] = True
                queue.append(s)
    return in_reach


def almost_sure_reach_set(m: BaseMdp):
    """States from which the goal is reachable with probability 1 under the
    reachability-maximizing policy (iterated fixed point: restrict to actions
    whose support stays inside the current candidate set, then keep the
    states that can still reach the goal)."""
    preds = _predecessor_lists(m)
    A = m.action_count
    candidate = np.ones(m.state_count, dtype=bool)
    while True:
        allowed = np.zeros(m.state_count * A, dtype=bool)
        for s in range(m.state_count):
            for a in range(A):
                lo, hi = m._slice(s, a)
                if lo == hi:
                    continue
                if candidate[m.trans_succ[lo:hi]].all():
                    allowed[s * A + a] = True
        reach = _positive_reach(m, allowed, preds)
        if (reach == candidate).all():
            return candidate
        candidate = reach


def validate_ssp(m: BaseMdp) -> ValidationReport:
    """Check SSP validity: normalized transitions, absorbing zero-cost goal,
    no action-less non-goal states, and a complete proper policy."""
    messages = []
    structure_ok = True

    for s in range(m.state_count):
        for a in range(m.action_count):
            lo, hi = m._slice(s, a)
            if lo == hi:
                continue
            probs = m.trans_prob[lo:hi]
            if (probs <= 0).any() or (probs > 1 + PROB_TOL).any():
                messages.append(f"({s},{a}): probabilities outside (0, 1]")
                structure_ok = False
            total = float(probs.sum())
            if abs(total - 1.0) > PROB_TOL:
                messages.append(f"({s},{a}): probabilities sum to {total}")
                structure_ok = False
            if m.cost_of(s, a) < 0:
                messages.append(f"({s},{a}): negative cost")
                structure_ok = False

    g = m.goal_state
    goal_actions = m.enabled_actions(g)
    if not goal_actions:
        messages.append("goal state has no enabled action")
        structure_ok = False
    for a in goal_actions:
        if m.support(g, a) != [(g, 1.0)] or m.cost_of(g, a) != 0.0:
            messages.append(f"goal state not absorbing at zero cost (action {a})")
            structure_ok = False

    for s in range(m.state_count):
        if s != g and not m.enabled_actions(s):
            messages.append(f"state {s} has no enabled action")
            structure_ok = False

    proper = almost_sure_reach_set(m)
    proper_policy_found = bool(proper.all())
    if not proper_policy_found:
        trapped = np.flatnonzero(~proper)[:10].tolist()
        messages.append(f"goal not almost-surely reachable from states {trapped}")

    return ValidationReport(
        is_ssp=structure_ok and proper_policy_found,
        proper_policy_found=proper_policy_found,
        messages=messages,
    )


# -- Bellman machinery -----------------------------------------------------


def q_value(m: BaseMdp, values, s, a):
    """One-step lookahead C(s, a) + sum_s' T(s, a, s') v(s')."""
    if not m.is_enabled(s, a):
        raise ValueError(f"action {a} is not enabled in state {s}")
    lo, hi = m._slice(s, a)
    return m.cost_of(s, a) + float(
        np.dot(m.trans_prob[lo:hi], values[m.trans_succ[lo:hi]]))


def _q_table(m: BaseMdp, values):
    """Dense (S, A) table of one-step lookahead values, inf where disabled."""
    S, A = m.state_count, m.action_count
    q = np.full((S, A), np.inf)
    mats = m.action_matrices()
    enabled = m.enabled.reshape(S, A)
    cost = m.cost.reshape(S, A)
    for a in range(A):
        col = cost[:, a] + mats[a] @ values
        q[:, a] = np.where(enabled[:, a], col, np.inf)
    return q


def _masked_q_table(m: BaseMdp, values, exclude_nop):
    q = _q_table(m, values)
    if exclude_nop:
        only_nop = m.enabled.reshape(m.state_count, m.action_count).sum(axis=1)
        only_nop = (only_nop == 1) & np.isfinite(q[:, m.nop_action])
        q[~only_nop, m.nop_action] = np.inf
    return q


def bellman_backup(m: BaseMdp, values, exclude_nop=False):
    """One synchronous sweep of the Bellman operator (min over actions;
    optionally over non-NOP actions only, where any other is enabled)."""
    return _masked_q_table(m, values, exclude_nop).min(axis=1)


def value_iteration(m: BaseMdp, tolerance=1e-9, max_sweeps=10 ** 6,
                    initial=None, exclude_nop=False):
    """Exact SSP solve by value iteration to the given Bellman residual.

    Returns (values, policy); the policy is greedy with ties broken by the
    lowest action index.  With exclude_nop the optimization is restricted
    to policies that never select NOP (the cost of the best pure acting
    policy), except in states where nothing else is enabled.
    """
    values = (np.zeros(m.state_count) if initial is None
              else np.asarray(initial, dtype=np.float64).copy())
    for _ in range(max_sweeps):
        new_values = bellman_backup(m, values, exclude_nop)
        residual = float(np.max(np.abs(new_values - values)))
        values = new_values
        if residual <= tolerance:
            break
    else:
        raise SolverDivergenceError(
            f"no convergence after {max_sweeps} sweeps (residual {residual:g}); "
            "input is likely not an SSP MDP")
    policy = np.argmin(_masked_q_table(m, values, exclude_nop), axis=1)
    return values, policy


def _policy_chain(m: BaseMdp, action_sets):
    """Successor lists and per-state costs of the Markov chain induced by a
    policy given as per-state action sets (uniform mixture over each set)."""
    edges = []
    costs = np.zeros(m.state_count)
    for s, actions in enumerate(action_sets):
        if not actions:
            raise ValueError(f"policy selects no action in state {s}")
        dist = {}
        w = 1.0 / len(actions)
        for a in actions:
            a = int(a)
            if not m.is_enabled(s, a):
                raise ValueError(
                    f"policy selects disabled action {a} in state {s}")
            costs[s] += w * m.cost_of(s, a)
            for succ, p in m.support(s, a):
                dist[succ] = dist.get(succ, 0.0) + w * p
        edges.append(sorted(dist.items()))
    return edges, costs


def _proper_states(m: BaseMdp, edges):
    """States from which the policy chain is absorbed at the goal w.p. 1:
    states that cannot reach a state with no path to the goal."""
    S = m.state_count
    preds = [[] for _ in range(S)]
    for s, support in enumerate(edges):
        for succ, _ in support:
            preds[succ].append(s)
    reach_goal = np.zeros(S, dtype=bool)
    reach_goal[m.goal_state] = True
    queue = [m.goal_state]
    while queue:
        t = queue.pop()
        for s in preds[t]:
            if not reach_goal[s]:
                reach_goal[s] = True
                queue.append(s)
    trapped = ~reach_goal
    # states that can reach a trapped state are improper too
    hits_trap = trapped.copy()
    queue = np.flatnonzero(trapped).tolist()
    while queue:
        t = queue.pop()
        for s in preds[t]:
            if not hits_trap[s]:
                hits_trap[s] = True
                queue.append(s)
    return ~hits_trap


def policy_evaluation(m: BaseMdp, pi, tolerance=1e-9):
    """Expected cost-to-goal of a fixed policy (sparse linear solve).

    ``pi`` is an int array of action indices, or a list of per-state action
    sets evaluated as a uniform mixture (unbiased tie-breaking).  States
    from which the policy fails to reach the goal w.p. 1 get +inf; raises
    ImproperPolicyError when the start state is one of them.
    """
    if isinstance(pi, np.ndarray) and pi.ndim == 1:
        action_sets = [[int(a)] for a in pi]
    else:
        action_sets = [list(acts) if hasattr(acts, "__len__") else [int(acts)]
                       for acts in pi]
    edges, step_costs = _policy_chain(m, action_sets)
    proper = _proper_states(m, edges)
    if not proper[m.start_state]:
        raise ImproperPolicyError(int(np.flatnonzero(~proper)[0]))

    values = np.full(m.state_count, np.inf)
    solve_states = np.flatnonzero(proper & (np.arange(m.state_count) != m.goal_state))
    if solve_states.size:
        index_of = {int(s): i for i, s in enumerate(solve_states)}
        n = solve_states.size
        rows, cols, vals = [], [], []
        rhs = np.zeros(n)
        for i, s in enumerate(solve_states):
            rhs[i] = step_costs[int(s)]
            rows.append(i)
            cols.append(i)
            vals.append(1.0)
            for succ, p in edges[int(s)]:
                if succ == m.goal_state:
                    continue
                rows.append(i)
                cols.append(index_of[succ])
                vals.append(-p)
        mat = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        sol = spsolve(mat.tocsc(), rhs)
        values[solve_states] = sol
    values[m.goal_state] = 0.0
    # the direct solve should sit at the fixed point already
    finite = np.isfinite(values)
    check = np.array([step_costs[s] + sum(
        p * values[succ] for succ, p in edges[s])
        for s in np.flatnonzero(finite)])
    resid = float(np.max(np.abs(check - values[finite]))) if finite.any() else 0.0
    if resid > max(tolerance, 1e-6 * (1.0 + np.max(np.abs(check)))):
        raise SolverDivergenceError(f"policy evaluation residual {resid:g}")
    return values


def greedy_policy(m: BaseMdp, values, exclude_nop=False):
    """Greedy policy on a value function, ties to the lowest action index."""
    q = _q_table(m, values)
    if exclude_nop:
        q = q.copy()
        q[:, m.nop_action] = np.inf
        # states with only NOP enabled keep it
        only_nop = ~np.isfinite(q).any(axis=1)
        pi = np.argmin(q, axis=1)
        pi[only_nop] = m.nop_action
        return pi
    return np.argmin(q, axis=1)


def greedy_action_sets(m: BaseMdp, values, exclude_nop=False, tol=1e-9):
    """Per-state sets of greedy actions (all within tol of the minimum),
    for evaluating a greedy policy with unbiased tie-breaking."""
    q = _masked_q_table(m, values, exclude_nop)
    best = q.min(axis=1)
    sets = []
    for s in range(m.state_count):
        ties = [a for a in range(m.action_count)
                if np.isfinite(q[s, a]) and q[s, a] <= best[s] + tol]
        sets.append(ties)
    return sets


def sample_transition(m: BaseMdp, s, a, rng):
    """Draw a successor of (s, a) from the given random stream."""
    if not m.is_enabled(s, a):
        raise ValueError(f"action {a} is not enabled in state {s}")
    from . import _kernels
    return int(_kernels.sample_successor(
        m.trans_indptr, m.trans_succ, m.trans_prob,
        m.action_count, s, a, rng.state))
