"""Shared fixtures and generators for the test suite."""

import numpy as np
import pytest

from metaplan import BaseMdp

#: One summary line per acceptance criterion, printed after the test run.
CRITERION_LINES = []


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERION_LINES):
            terminalreporter.write_line(line)


def random_ssp(rng, n_states=6, n_actions=3, nop_self_loop=True):
    """Random small SSP MDP that is valid by construction.

    The last state is the absorbing goal.  Action 0 always has the next
    state in its support, so every state has a positive-probability path
    to the goal and the goal is almost surely reachable.  The last action
    is the NOP; by default it is a positive-cost self-loop (a pure
    thinking action), which keeps the optimal policy free of NOP.
    """
    goal = n_states - 1
    nop = n_actions - 1
    transitions = {}
    costs = {}
    for s in range(n_states):
        if s == goal:
            for a in range(n_actions):
                transitions[(s, a)] = [(s, 1.0)]
            continue
        for a in range(n_actions):
            if a == nop and nop_self_loop:
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


@pytest.fixture
def np_rng():
    return np.random.default_rng(20260823)
