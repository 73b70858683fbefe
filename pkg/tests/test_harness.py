"""Episode loop, Monte Carlo aggregation, sweeps, and CSV output."""

import pytest

from metaplan import (AgentConfig, DomainConfig, ExperimentConfig,
                      RandomStream, run_episode, run_experiment, run_sweep)
from metaplan.harness import (CSV_COLUMNS, decision_log_rows, rows_to_csv,
                              sweep_average)
from metaplan.rng import episode_seed


def quick_cfg(**kw):
    defaults = dict(domain=DomainConfig("stochastic"),
                    agent=AgentConfig("no_info_think"),
                    episodes=5, seed=11)
    defaults.update(kw)
    return ExperimentConfig(**defaults)


class TestEpisode:
    def test_cost_accounting_identity(self):
        cfg = quick_cfg(agent=AgentConfig("no_info_think"))
        stats = run_episode(cfg, RandomStream(episode_seed(cfg.seed, 0)))
        domain = cfg.domain.resolved()
        assert stats.reached_goal
        expected = (stats.think_count * domain.cost_think
                    + stats.act_count * domain.cost_act)
        assert stats.total_cost == pytest.approx(expected)

    def test_episode_determinism(self):
        cfg = quick_cfg(agent=AgentConfig("metareasoner"))
        runs = [run_episode(cfg, RandomStream(episode_seed(cfg.seed, 3)))
                for _ in range(2)]
        assert runs[0].total_cost == runs[1].total_cost
        assert runs[0].think_count == runs[1].think_count
        assert runs[0].act_count == runs[1].act_count

    def test_truncation_cap(self):
        # an agent that always thinks in place can never reach the goal
        cfg = quick_cfg(agent=AgentConfig("prob", p_think=1.0),
                        max_decisions_per_episode=25)
        stats = run_episode(cfg, RandomStream(1))
        assert stats.truncated and not stats.reached_goal
        assert stats.think_count == 25

    def test_trace_records(self):
        cfg = quick_cfg(agent=AgentConfig("metareasoner"), trace=True)
        stats = run_episode(cfg, RandomStream(episode_seed(cfg.seed, 0)))
        assert len(stats.decisions) == stats.think_count + stats.act_count
        log = decision_log_rows([stats])
        assert log[0]["decision"] == "think"
        assert log[0]["q_nop"] == ""  # uninformed first step
        assert any(r["voc"] != "" for r in log)


class TestExperiment:
    def test_single_episode_aggregate(self):
        cfg = quick_cfg(episodes=1)
        res = run_experiment(cfg, keep_stats=True)
        ep = res.episode_stats[0]
        assert res.mean_cost == pytest.approx(ep.total_cost)
        assert res.stderr == 0.0
        assert res.mean_thinks == ep.think_count
        assert res.trunc_rate == 0.0

    def test_csv_row_shapes(self):
        res = run_experiment(quick_cfg(agent=AgentConfig("prob", p_think=0.25)))
        row = res.csv_row()
        assert set(row) == set(CSV_COLUMNS)
        assert row["agent"] == "prob(p=0.25)"
        assert row["param"] == "p=0.25"
        assert row["cost_act"] == "11"
        float(row["mean_cost"])

    def test_byte_identical_reruns(self):
        rows1 = [run_experiment(quick_cfg()).csv_row()]
        rows2 = [run_experiment(quick_cfg()).csv_row()]
        assert rows_to_csv(rows1) == rows_to_csv(rows2)

    def test_seed_changes_results(self):
        r1 = run_experiment(quick_cfg(seed=1))
        r2 = run_experiment(quick_cfg(seed=2))
        assert r1.mean_cost != r2.mean_cost


class TestSweep:
    def test_row_counts_and_average(self):
        agents = [AgentConfig("heuristic"), AgentConfig("no_info_think")]
        base = quick_cfg(episodes=2)
        rows, results = run_sweep(base, "cost_think", agents,
                                  values=(1.0, 5.0))
        # one row per (value, agent) cell plus one average row per agent
        assert len(rows) == 2 * 2 + 2
        avg_rows = [r for r in rows if r["param"] == "avg"]
        assert all(r["cost_think"] == "avg" and r["cost_act"] == "11"
                   for r in avg_rows)
        avg = sweep_average(results, "heuristic", values=(1.0, 5.0))
        cells = [results[("heuristic", 1.0)], results[("heuristic", 5.0)]]
        assert avg == pytest.approx(sum(c.mean_cost for c in cells) / 2)

    def test_act_axis_fixes_think(self):
        rows, results = run_sweep(quick_cfg(episodes=1), "cost_act",
                                  [AgentConfig("heuristic")], values=(5.0,))
        cell = [r for r in rows if r["param"] != "avg"][0]
        assert cell["cost_think"] == "1"
        assert cell["cost_act"] == "5"

    def test_bad_axis(self):
        with pytest.raises(ValueError):
            run_sweep(quick_cfg(), "cost_wind", [AgentConfig("heuristic")])
