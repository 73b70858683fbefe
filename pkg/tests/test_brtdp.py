"""Bounded planner: bound maintenance, trials, recommendations, drops."""

import numpy as np
import pytest

from metaplan import (BaseMdp, DomainConfig, RandomStream, build_domain,
                      heuristic_bounds, init_planner, q_lower, q_upper,
                      recommended_action, run_trial, thinking_cycle,
                      value_iteration)

from conftest import random_ssp


def loose_bounds(m, scale=50.0):
    lower = np.zeros(m.state_count)
    upper = np.full(m.state_count, scale)
    upper[m.goal_state] = 0.0
    return lower, upper


class TestInit:
    def test_crossed_bounds_rejected(self, np_rng):
        m = random_ssp(np_rng)
        lower = np.full(m.state_count, 2.0)
        upper = np.ones(m.state_count)
        with pytest.raises(ValueError):
            init_planner(m, lower, upper)

    def test_nonzero_goal_bound_rejected(self, np_rng):
        m = random_ssp(np_rng)
        lower = np.zeros(m.state_count)
        upper = np.ones(m.state_count)
        with pytest.raises(ValueError):
            init_planner(m, lower, upper)

    def test_converged_init_is_fixed_point(self, np_rng):
        m = random_ssp(np_rng)
        values, _ = value_iteration(m, exclude_nop=True)
        b = init_planner(m, values, values)
        rng = RandomStream(1)
        for _ in range(10):
            run_trial(b, m, m.start_state, rng)
        assert np.allclose(b.lower, values, atol=1e-9)
        assert np.allclose(b.upper, values, atol=1e-9)
        assert b.monotone_violations == 0


class TestTrials:
    def test_upper_converges_to_optimal(self, np_rng):
        # the planner prices the acting problem, so convergence target is
        # the NOP-free optimum; scaling V* by 2 gives a monotone upper bound
        for _ in range(5):
            m = random_ssp(np_rng)
            values, _ = value_iteration(m, exclude_nop=True)
            b = init_planner(m, np.zeros(m.state_count), 2.0 * values)
            rng = RandomStream(7)
            for _ in range(2000):
                run_trial(b, m, m.start_state, rng)
            assert abs(b.upper[m.start_state] - values[m.start_state]) < 1e-6
            assert b.monotone_violations == 0

    def test_bounds_stay_ordered(self, np_rng):
        m = random_ssp(np_rng, n_states=8)
        b = init_planner(m, *loose_bounds(m))
        rng = RandomStream(3)
        for _ in range(200):
            run_trial(b, m, m.start_state, rng)
            assert (b.lower <= b.upper + 1e-9).all()

    def test_trial_counts_steps(self, np_rng):
        m = random_ssp(np_rng)
        b = init_planner(m, *loose_bounds(m))
        steps = run_trial(b, m, m.start_state, RandomStream(0), max_len=50)
        assert 1 <= steps <= 50
        assert b.trial_count == 1
        assert b.steps_simulated == steps
        assert b.touched.any()

    def test_determinism(self, np_rng):
        m = random_ssp(np_rng)
        uppers = []
        for _ in range(2):
            b = init_planner(m, *loose_bounds(m))
            rng = RandomStream(42)
            for _ in range(50):
                run_trial(b, m, m.start_state, rng)
            uppers.append(b.upper.copy())
        assert (uppers[0] == uppers[1]).all()


class TestRecommendation:
    def test_greedy_on_upper_excludes_nop(self, np_rng):
        m = random_ssp(np_rng)
        values, policy = value_iteration(m, exclude_nop=True)
        b = init_planner(m, values, values)
        for s in range(m.state_count - 1):
            a = recommended_action(b, m, s)
            assert a != m.nop_action
            assert a == policy[s]

    def test_nop_fallback_when_only_action(self):
        m = BaseMdp(2, 1, 0, 0, 1,
                    {(0, 0): [(1, 1.0)], (1, 0): [(1, 1.0)]}, {(0, 0): 1.0})
        b = init_planner(m, np.zeros(2), np.array([1.0, 0.0]))
        assert recommended_action(b, m, 0) == 0

    def test_cost_scaling_preserves_recommendation(self, np_rng):
        m = random_ssp(np_rng)
        transitions = {}
        costs = {}
        for s in range(m.state_count):
            for a in m.enabled_actions(s):
                transitions[(s, a)] = m.support(s, a)
                costs[(s, a)] = 3.0 * m.cost_of(s, a)
        m3 = BaseMdp(m.state_count, m.action_count, m.nop_action,
                     m.start_state, m.goal_state, transitions, costs)
        lower, upper = loose_bounds(m)
        b1 = init_planner(m, lower, upper)
        b3 = init_planner(m3, 3.0 * lower, 3.0 * upper)
        for s in range(m.state_count - 1):
            assert recommended_action(b1, m, s) == recommended_action(b3, m3, s)
            a = recommended_action(b1, m, s)
            assert q_upper(b3, m3, s, a) == pytest.approx(
                3.0 * q_upper(b1, m, s, a))


class TestThinkingCycle:
    def test_drops_recorded_at_state_and_nop_successors(self, np_rng):
        m = random_ssp(np_rng, nop_self_loop=False)
        b = init_planner(m, *loose_bounds(m))
        s = m.start_state
        thinking_cycle(b, m, s, RandomStream(1))
        for a in range(m.action_count):
            assert b.drops.has(s, a)
        for succ, _ in m.support(s, m.nop_action):
            for a in range(m.action_count):
                assert b.drops.has(succ, a)

    def test_drops_nonnegative_and_zero_when_converged(self, np_rng):
        m = random_ssp(np_rng)
        values, _ = value_iteration(m, exclude_nop=True)
        b = init_planner(m, values, values)
        thinking_cycle(b, m, m.start_state, RandomStream(1))
        for a in m.enabled_actions(m.start_state):
            assert b.drops.drop(m.start_state, a) == 0.0

    def test_loose_bounds_produce_positive_drop(self, np_rng):
        m = random_ssp(np_rng)
        b = init_planner(m, *loose_bounds(m, scale=100.0))
        thinking_cycle(b, m, m.start_state, RandomStream(1))
        drops = [b.drops.drop(m.start_state, a)
                 for a in m.enabled_actions(m.start_state)]
        assert max(drops) > 0.0

    def test_unseen_state_has_no_record(self, np_rng):
        m = random_ssp(np_rng)
        b = init_planner(m, *loose_bounds(m))
        assert not b.drops.has_record.any()
        assert b.drops.drop(0, 0) is None


class TestOnDomains:
    def test_stochastic_episode_monotone(self):
        cfg = DomainConfig("stochastic")
        m, spec = build_domain(cfg)
        b = init_planner(m, *heuristic_bounds(spec, cfg))
        rng = RandomStream(11)
        for _ in range(300):
            run_trial(b, m, m.start_state, rng)
        assert b.monotone_violations == 0
        assert b.upper[m.start_state] < heuristic_bounds(spec, cfg)[1][m.start_state]
