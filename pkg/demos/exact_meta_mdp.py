"""Exact think-or-act scheduling on a small random MDP.

For MDPs small enough to enumerate, the think-or-act scheduling problem
is itself an MDP: pair every world state with the solver's configuration
after i sweeps, let NOP advance the configuration, and let every other
action execute the configuration's current recommendation.  Solving the
product gives the best any scheduler could do, which this script compares
against fixed think-k-then-act schedules.  It also runs the zero-cost
chain self-check: prepending enough free thinking steps must recover the
base optimum exactly.
"""

import numpy as np

from metaplan import (BaseMdp, construct_lollypop, construct_meta_mdp,
                      instrument_solver, meta_value, metareasoning_gap_ub,
                      policy_evaluation, replace_nop_with_self_loop,
                      value_iteration)


def random_ssp(rng, n_states=6, n_actions=3):
    """Random small SSP MDP; the last state is the absorbing goal and the
    last action is a costly self-loop NOP.  Action 0 always includes the
    next state in its support, so the goal stays reachable."""
    goal, nop = n_states - 1, n_actions - 1
    transitions, costs = {}, {}
    for s in range(n_states):
        if s == goal:
            for a in range(n_actions):
                transitions[(s, a)] = [(s, 1.0)]
            continue
        for a in range(n_actions):
            if a == nop:
                transitions[(s, a)] = [(s, 1.0)]
                costs[(s, a)] = float(rng.uniform(0.5, 1.5))
                continue
            support = set(rng.choice(n_states, size=rng.integers(1, 4),
                                     replace=False).tolist())
            if a == 0:
                support.add(min(s + 1, goal))
            support = sorted(support)
            probs = rng.uniform(0.2, 1.0, size=len(support))
            probs /= probs.sum()
            transitions[(s, a)] = list(zip(support, probs.tolist()))
            costs[(s, a)] = float(rng.uniform(0.5, 2.0))
    return BaseMdp(state_count=n_states, action_count=n_actions,
                   nop_action=nop, start_state=0, goal_state=goal,
                   transitions=transitions, costs=costs)


def main():
    rng = np.random.default_rng(42)
    m = random_ssp(rng, n_states=6, n_actions=3)

    trace = instrument_solver(m)
    mm = construct_meta_mdp(m, trace)
    v_meta = meta_value(mm)
    print(f"solver needs {len(trace)} configurations to converge")
    print(f"product has {mm.mdp.state_count} states")
    print(f"optimal schedule value from the start state: {v_meta:.4f}")

    nop_cost = m.cost_of(m.start_state, m.nop_action)
    schedule = {}
    for k in range(len(trace)):
        pi = trace.policies[k]
        if (pi == m.nop_action).any():
            continue  # policy still recommends NOP somewhere
        schedule[k] = k * nop_cost + float(
            policy_evaluation(m, pi)[m.start_state])
    best_k = min(schedule, key=schedule.get)
    first_k = min(schedule)
    print(f"fixed think-k-then-act schedules (first executable k "
          f"= {first_k}):")
    for k in sorted({first_k, best_k, max(schedule)}):
        print(f"  think {k} cycles then act: {schedule[k]:.4f}")
    print(f"the adaptive schedule saves "
          f"{schedule[best_k] - v_meta:.4f} over the best fixed one")

    # free-thinking chain: meta value collapses to the base optimum
    modified = replace_nop_with_self_loop(m)
    target = float(value_iteration(modified)[0][m.start_state])
    chain_len = len(instrument_solver(modified))
    lolly = construct_lollypop(m, chain_len=chain_len)
    v_lolly = meta_value(construct_meta_mdp(lolly, instrument_solver(lolly)))
    print(f"\nchain self-check: {v_lolly:.6f} vs base optimum {target:.6f} "
          f"(diff {abs(v_lolly - target):.2e})")

    # how much is there to gain over blindly following a heuristic?
    heuristic = 2.0 * value_iteration(modified)[0]
    gap = metareasoning_gap_ub(m, heuristic)
    print(f"gap upper bound with a doubled-optimum heuristic: "
          f"{gap.mg_ub:.3f}")


if __name__ == "__main__":
    main()
