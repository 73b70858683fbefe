"""Solver instrumentation, the product construction, the free-thinking
chain reduction, and gap reports."""

import numpy as np
import pytest

from metaplan import (BaseMdp, GapReport, construct_lollypop,
                      construct_meta_mdp, instrument_solver, meta_exact_report,
                      meta_value, metareasoning_gap_ub,
                      policy_evaluation, replace_nop_with_self_loop,
                      solve_meta, validate_ssp, value_iteration)

from conftest import random_ssp


def chain3():
    """3-state deterministic chain with a costly self-loop NOP."""
    transitions = {}
    costs = {}
    for s in range(2):
        transitions[(s, 0)] = [(s + 1, 1.0)]
        costs[(s, 0)] = 1.0
        transitions[(s, 1)] = [(s, 1.0)]
        costs[(s, 1)] = 2.0
    transitions[(2, 0)] = [(2, 1.0)]
    transitions[(2, 1)] = [(2, 1.0)]
    return BaseMdp(3, 2, 1, 0, 2, transitions, costs)


def needed_chain(m):
    from metaplan import instrument_solver, replace_nop_with_self_loop
    return len(instrument_solver(replace_nop_with_self_loop(m)))


class TestInstrumentation:
    def test_chain_trace_length(self):
        # zero init needs one sweep per hop; the in-tolerance final sweep
        # is appended only if it still moved the values
        trace = instrument_solver(chain3())
        assert len(trace) == 3

    def test_converged_input_trace_length_one(self):
        m = chain3()
        values, _ = value_iteration(m)
        trace = instrument_solver(m, initial=values)
        assert len(trace) == 1

    def test_final_policy_matches_value_iteration(self, np_rng):
        for _ in range(5):
            m = random_ssp(np_rng)
            trace = instrument_solver(m)
            _, policy = value_iteration(m)
            assert (trace.policies[-1] == policy).all()

    def test_determinism(self, np_rng):
        m = random_ssp(np_rng)
        t1 = instrument_solver(m)
        t2 = instrument_solver(m)
        assert len(t1) == len(t2)
        for v1, v2 in zip(t1.values, t2.values):
            assert (v1 == v2).all()

    def test_granularity_validation(self):
        with pytest.raises(ValueError):
            instrument_solver(chain3(), granularity=0)

    def test_size_cap(self):
        with pytest.raises(MemoryError):
            instrument_solver(chain3(), size_cap=4)


class TestProduct:
    def test_product_size(self, np_rng):
        m = random_ssp(np_rng)
        trace = instrument_solver(m)
        mm = construct_meta_mdp(m, trace)
        assert mm.mdp.state_count == m.state_count * len(trace)

    def test_two_meaningful_choices(self, np_rng):
        # every non-goal product state allows only NOP and the current
        # recommendation
        m = random_ssp(np_rng)
        trace = instrument_solver(m)
        mm = construct_meta_mdp(m, trace)
        for idx in range(mm.mdp.state_count):
            if idx == mm.mdp.goal_state:
                continue
            s, i = mm.unflat(idx)
            allowed = {m.nop_action, int(trace.policies[i][s])}
            enabled = set(mm.mdp.enabled_actions(idx))
            assert enabled <= allowed
            if s != m.goal_state:
                assert m.nop_action in enabled

    def test_costs_copied_from_base(self, np_rng):
        m = random_ssp(np_rng)
        trace = instrument_solver(m)
        mm = construct_meta_mdp(m, trace)
        for idx in range(mm.mdp.state_count):
            s, i = mm.unflat(idx)
            if s == m.goal_state:
                continue
            for a in mm.mdp.enabled_actions(idx):
                assert mm.mdp.cost_of(idx, a) == m.cost_of(s, a)

    def test_product_is_ssp(self, np_rng):
        for _ in range(10):
            m = random_ssp(np_rng, n_states=int(np_rng.integers(3, 8)))
            mm = construct_meta_mdp(m, instrument_solver(m))
            assert validate_ssp(mm.mdp).is_ssp

    def test_trace_mismatch_rejected(self, np_rng):
        m = random_ssp(np_rng, n_states=5)
        other = random_ssp(np_rng, n_states=7)
        with pytest.raises(ValueError):
            construct_meta_mdp(m, instrument_solver(other))


class TestSolveMeta:
    def test_converged_start_never_thinks(self, np_rng):
        # start the solver at V*: thinking can only add cost
        m = random_ssp(np_rng)
        values, _ = value_iteration(m, exclude_nop=True)
        trace = instrument_solver(m, initial=values)
        mm = construct_meta_mdp(m, trace)
        base_start = float(values[m.start_state])
        assert meta_value(mm) == pytest.approx(base_start, abs=1e-9)

    def test_meta_value_bounded_by_fixed_schedules(self, np_rng):
        # optimal scheduling beats thinking k cycles upfront, for every k
        m = random_ssp(np_rng)
        trace = instrument_solver(m)
        mm = construct_meta_mdp(m, trace)
        v = meta_value(mm)
        nop_cost = m.cost_of(m.start_state, m.nop_action)
        for k in range(len(trace)):
            pi = trace.policies[k].copy()
            if (pi == m.nop_action).any():
                continue  # schedule not executable without more thinking
            schedule_cost = k * nop_cost + float(
                policy_evaluation(m, pi)[m.start_state])
            assert v <= schedule_cost + 1e-9


class TestLollypop:
    def test_self_loop_replacement(self, np_rng):
        m = random_ssp(np_rng, nop_self_loop=False)
        mod = replace_nop_with_self_loop(m, nop_cost=2.0)
        for s in range(m.state_count - 1):
            assert mod.support(s, m.nop_action) == [(s, 1.0)]
            assert mod.cost_of(s, m.nop_action) == 2.0
        assert mod.support(0, 0) == m.support(0, 0)

    def test_structure_and_validity(self, np_rng):
        m = random_ssp(np_rng)
        n = needed_chain(m)
        lolly = construct_lollypop(m, chain_len=n)
        assert lolly.start_state == m.state_count
        assert validate_ssp(lolly).is_ssp
        # zero-cost chain, entering the original start at the end
        assert lolly.cost_of(lolly.start_state, m.nop_action) == 0.0
        assert lolly.support(m.state_count + n, m.nop_action) == \
            [(m.start_state, 1.0)]

    def test_short_chain_rejected(self, np_rng):
        m = random_ssp(np_rng)
        with pytest.raises(ValueError):
            construct_lollypop(m, chain_len=0)

    def test_free_thinking_reduction(self, np_rng):
        # the core equivalence: meta value at the chain head equals the
        # base optimum, because converging the solver costs nothing
        for _ in range(5):
            m = random_ssp(np_rng, n_states=int(np_rng.integers(3, 7)))
            target = float(value_iteration(
                replace_nop_with_self_loop(m))[0][m.start_state])
            lolly = construct_lollypop(m, chain_len=needed_chain(m))
            mm = construct_meta_mdp(lolly, instrument_solver(lolly))
            assert meta_value(mm) == pytest.approx(target, abs=1e-6)


class TestGap:
    def test_ratio_arithmetic(self):
        assert GapReport(1089.0, 103.9).mg_ub == pytest.approx(10.48, abs=0.01)
        assert GapReport(119.4, 66.0).mg_ub == pytest.approx(1.809, abs=1e-3)

    def test_optimal_heuristic_gives_unit_gap(self, np_rng):
        m = random_ssp(np_rng)
        values, _ = value_iteration(m, exclude_nop=True)
        gap = metareasoning_gap_ub(m, values)
        assert gap.defined
        assert gap.mg_ub == pytest.approx(1.0, abs=1e-6)

    def test_gap_at_least_one(self, np_rng):
        for _ in range(10):
            m = random_ssp(np_rng)
            upper = np_rng.uniform(0.0, 10.0, m.state_count)
            upper[m.goal_state] = 0.0
            gap = metareasoning_gap_ub(m, upper)
            if gap.defined:
                assert gap.mg_ub >= 1.0 - 1e-9

    def test_improper_heuristic_flagged(self):
        # valid SSP (each state has a direct exit to the goal) but the
        # zero heuristic sends the greedy agent around the cheap 0 <-> 1
        # loop forever
        transitions = {(0, 0): [(1, 1.0)], (0, 1): [(2, 1.0)],
                       (0, 2): [(0, 1.0)],
                       (1, 0): [(0, 1.0)], (1, 1): [(2, 1.0)],
                       (1, 2): [(1, 1.0)],
                       (2, 0): [(2, 1.0)], (2, 1): [(2, 1.0)],
                       (2, 2): [(2, 1.0)]}
        costs = {(0, 0): 1.0, (0, 1): 5.0, (0, 2): 1.0,
                 (1, 0): 1.0, (1, 1): 10.0, (1, 2): 1.0}
        m = BaseMdp(3, 3, 2, 0, 2, transitions, costs)
        assert validate_ssp(m).is_ssp
        gap = metareasoning_gap_ub(m, np.zeros(3))
        assert not gap.defined
        assert gap.heuristic_cost == float("inf")
        assert gap.mg_ub == float("inf")


class TestReport:
    def test_bundle_keys_and_selfcheck(self, np_rng):
        m = random_ssp(np_rng)
        values, _ = value_iteration(m, exclude_nop=True)
        report = meta_exact_report(m, heuristic_upper=values)
        assert report["product_size"] == m.state_count * report["trace_length"]
        assert report["lollypop_check"] == "pass"
        assert report["gap"]["mg_ub"] == pytest.approx(1.0, abs=1e-6)
