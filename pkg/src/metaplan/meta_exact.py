"""Exact metareasoning on small instances.

An anytime solver is instrumented so that every intermediate configuration
(value snapshot plus its greedy action map) is recorded.  The product of
the base MDP with that configuration chain is itself an SSP MDP in which
NOP means "run the solver one more step"; solving the product exactly
prices optimal think-vs-act scheduling.  A chain of free-thinking states
prepended to the base (the lollypop shape) makes that price collapse to
the base optimum, which gives a sharp numerical self-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mdp import (BaseMdp, ImproperPolicyError, SolverDivergenceError,
                  bellman_backup, greedy_action_sets, greedy_policy,
                  policy_evaluation, validate_ssp, value_iteration)

DEFAULT_SIZE_CAP = 10 ** 6


@dataclass
class SolverTrace:
    """Deterministic configuration chain of the instrumented solver.

    ``values[i]`` is the value snapshot of configuration i and
    ``policies[i]`` its greedy action map (over all enabled actions,
    NOP included).  One configuration step stands for one thinking cycle.
    """
    values: list = field(default_factory=list)
    policies: list = field(default_factory=list)

    def __len__(self):
        return len(self.values)


def instrument_solver(m: BaseMdp, granularity=1, tolerance=1e-9,
                      initial=None, size_cap=DEFAULT_SIZE_CAP,
                      max_sweeps=10 ** 6):
    """Run value iteration, snapshotting after every ``granularity``
    synchronous sweeps until the residual drops below ``tolerance``.

    The trace starts with the initial configuration; the final block, whose
    residual is already below tolerance, is recorded only if it still moved
    the values at all.
    """
    if granularity < 1:
        raise ValueError("granularity must be >= 1")
    values = (np.zeros(m.state_count) if initial is None
              else np.asarray(initial, dtype=np.float64).copy())
    trace = SolverTrace()
    _append(trace, m, values)
    sweeps = 0
    while True:
        block_start = values
        for _ in range(granularity):
            values = bellman_backup(m, values)
            sweeps += 1
        residual = float(np.max(np.abs(values - block_start)))
        if residual <= tolerance:
            if residual > 0.0:
                _append(trace, m, values)
            return trace
        _append(trace, m, values)
        if m.state_count * (len(trace) + 1) > size_cap:
            raise MemoryError(
                f"trace would exceed the size cap {size_cap}; raise size_cap "
                "to instrument this MDP")
        if sweeps >= max_sweeps:
            raise SolverDivergenceError(
                f"no convergence after {sweeps} sweeps; input is likely not "
                "an SSP MDP")


def _append(trace, m, values):
    trace.values.append(values.copy())
    trace.policies.append(greedy_policy(m, values))


@dataclass
class MetaMdp:
    """Product of a base MDP with a solver trace.

    State (s, i) has flat index s * L + i.  NOP advances the configuration
    (the last one self-loops, the solver has halted) while s moves by the
    base NOP dynamics; the only other enabled action is the configuration's
    recommendation f(s, chi_i).  Transitions into the base goal are routed
    to the single absorbing meta goal (goal, L - 1).
    """
    mdp: BaseMdp
    base: BaseMdp
    trace: SolverTrace

    @property
    def trace_len(self):
        return len(self.trace)

    def flat(self, s, i):
        return s * self.trace_len + i

    def unflat(self, idx):
        return idx // self.trace_len, idx % self.trace_len


def construct_meta_mdp(m: BaseMdp, trace: SolverTrace) -> MetaMdp:
    if not trace.values or trace.values[0].shape != (m.state_count,):
        raise ValueError("trace does not match the MDP")
    L = len(trace)
    nop = m.nop_action
    goal_flat = m.goal_state * L + (L - 1)

    def route(s):
        # all meta copies of the base goal collapse onto the meta goal
        return goal_flat if s == m.goal_state else None

    transitions = {}
    costs = {}
    for s in range(m.state_count):
        if s == m.goal_state:
            continue
        for i in range(L):
            here = s * L + i
            # NOP: base NOP dynamics x deterministic configuration advance
            if m.is_enabled(s, nop):
                nxt_i = min(i + 1, L - 1)
                dist = {}
                for succ, p in m.support(s, nop):
                    idx = route(succ)
                    if idx is None:
                        idx = succ * L + nxt_i
                    dist[idx] = dist.get(idx, 0.0) + p
                transitions[(here, nop)] = sorted(dist.items())
                costs[(here, nop)] = m.cost_of(s, nop)
            # the recommendation: base dynamics, configuration frozen
            f = int(trace.policies[i][s])
            if f == nop:
                continue
            dist = {}
            for succ, p in m.support(s, f):
                idx = route(succ)
                if idx is None:
                    idx = succ * L + i
                dist[idx] = dist.get(idx, 0.0) + p
            transitions[(here, f)] = sorted(dist.items())
            costs[(here, f)] = m.cost_of(s, f)
    # every copy of the base goal belongs to the goal set; the non-canonical
    # copies forward freely to the absorbing canonical one
    for i in range(L - 1):
        here = m.goal_state * L + i
        transitions[(here, nop)] = [(goal_flat, 1.0)]
        costs[(here, nop)] = 0.0
    transitions[(goal_flat, nop)] = [(goal_flat, 1.0)]

    product = BaseMdp(state_count=m.state_count * L,
                      action_count=m.action_count, nop_action=nop,
                      start_state=m.start_state * L,
                      goal_state=goal_flat,
                      transitions=transitions, costs=costs)
    return MetaMdp(mdp=product, base=m, trace=trace)


def solve_meta(mm: MetaMdp):
    """Exact solve of the product; returns (values, policy) over its flat
    states."""
    return value_iteration(mm.mdp)


def meta_value(mm: MetaMdp):
    values, _ = solve_meta(mm)
    return float(values[mm.mdp.start_state])


DEFAULT_SELF_LOOP_NOP_COST = 1.0


def replace_nop_with_self_loop(m: BaseMdp, nop_cost=DEFAULT_SELF_LOOP_NOP_COST):
    """Copy of m whose NOP is a positive-cost self-loop in every non-goal
    state (pure thinking, no movement)."""
    transitions = {}
    costs = {}
    for s in range(m.state_count):
        for a in range(m.action_count):
            if not m.is_enabled(s, a):
                continue
            if a == m.nop_action and s != m.goal_state:
                transitions[(s, a)] = [(s, 1.0)]
                costs[(s, a)] = nop_cost
            else:
                transitions[(s, a)] = m.support(s, a)
                costs[(s, a)] = m.cost_of(s, a)
    return BaseMdp(m.state_count, m.action_count, m.nop_action,
                   m.start_state, m.goal_state, transitions, costs)


def construct_lollypop(m: BaseMdp, chain_len,
                       nop_cost=DEFAULT_SELF_LOOP_NOP_COST) -> BaseMdp:
    """Prepend chain states s'_0 ... s'_{chain_len} whose NOP moves along
    the chain at zero cost, the last one entering m's start; original
    states get a positive-cost self-loop NOP.  New start = s'_0.

    chain_len must cover the solver trace of the modified base, so that an
    agent thinking its way down the chain exits with a converged
    configuration.
    """
    if chain_len < 0:
        raise ValueError("chain_len must be >= 0")
    modified = replace_nop_with_self_loop(m, nop_cost)
    trace_len = len(instrument_solver(modified))
    if chain_len < trace_len - 1:
        raise ValueError(
            f"chain_len {chain_len} is below the solver trace length "
            f"{trace_len - 1}; the free-thinking guarantee would not hold")

    S = m.state_count
    transitions = {}
    costs = {}
    for s in range(S):
        for a in range(m.action_count):
            if modified.is_enabled(s, a):
                transitions[(s, a)] = modified.support(s, a)
                costs[(s, a)] = modified.cost_of(s, a)
    for k in range(chain_len + 1):
        here = S + k
        nxt = S + k + 1 if k < chain_len else m.start_state
        transitions[(here, m.nop_action)] = [(nxt, 1.0)]
        costs[(here, m.nop_action)] = 0.0
    return BaseMdp(state_count=S + chain_len + 1,
                   action_count=m.action_count, nop_action=m.nop_action,
                   start_state=S, goal_state=m.goal_state,
                   transitions=transitions, costs=costs)


@dataclass
class GapReport:
    """Ratio of the initial-heuristic policy's cost to the optimum at the
    start state; an upper bound on what better think scheduling can gain."""
    heuristic_cost: float
    optimal_cost: float
    defined: bool = True

    @property
    def mg_ub(self):
        if not self.defined:
            return float("inf")
        return self.heuristic_cost / self.optimal_cost


def metareasoning_gap_ub(m: BaseMdp, heuristic_upper,
                         optimal_excludes_nop=True) -> GapReport:
    """Gap of the greedy-on-heuristic (non-NOP) policy versus the optimum.

    By default the optimum is taken over acting policies, NOP excluded:
    both sides of the ratio then price pure world policies, and thinking
    can at best close the gap between them.  Greedy ties on the heuristic
    are evaluated as an unbiased uniform mixture.  An improper heuristic
    policy is reported with an infinite cost and the ratio flagged
    undefined, not raised.
    """
    optimal_values, _ = value_iteration(m, exclude_nop=optimal_excludes_nop)
    optimal_cost = float(optimal_values[m.start_state])
    pi = greedy_action_sets(m, np.asarray(heuristic_upper, dtype=np.float64),
                            exclude_nop=True)
    try:
        heuristic_values = policy_evaluation(m, pi)
        heuristic_cost = float(heuristic_values[m.start_state])
    except ImproperPolicyError:
        return GapReport(float("inf"), optimal_cost, defined=False)
    return GapReport(heuristic_cost, optimal_cost)


def meta_exact_report(m: BaseMdp, heuristic_upper=None, chain_len=None):
    """Bundled JSON-friendly report: product size, exact meta value, base
    optimum, the free-thinking-chain self-check, and the gap."""
    trace = instrument_solver(m)
    mm = construct_meta_mdp(m, trace)
    base_values, _ = value_iteration(m)
    base_optimal = float(base_values[m.start_state])
    value = meta_value(mm)

    lolly = construct_lollypop(m, _default_chain_len(m) if chain_len is None
                               else chain_len)
    lolly_mm = construct_meta_mdp(lolly, instrument_solver(lolly))
    lolly_value = meta_value(lolly_mm)
    # the chain construction replaces the base NOP by a costly self-loop,
    # so its free-thinking guarantee targets that modified base's optimum
    target_values, _ = value_iteration(replace_nop_with_self_loop(m))
    lolly_target = float(target_values[m.start_state])
    lollypop_ok = abs(lolly_value - lolly_target) <= 1e-6

    report = {
        "product_size": mm.mdp.state_count,
        "trace_length": len(trace),
        "meta_value": value,
        "base_optimal": base_optimal,
        "lollypop_check": "pass" if lollypop_ok else "fail",
        "lollypop_value": lolly_value,
        "lollypop_target": lolly_target,
    }
    if heuristic_upper is not None:
        gap = metareasoning_gap_ub(m, heuristic_upper)
        report["gap"] = {
            "heuristic_cost": gap.heuristic_cost,
            "optimal_cost": gap.optimal_cost,
            "mg_ub": gap.mg_ub if gap.defined else None,
        }
    return report


def _default_chain_len(m):
    return len(instrument_solver(replace_nop_with_self_loop(m)))
