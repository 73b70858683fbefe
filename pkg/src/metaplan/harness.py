"""Episode simulation, Monte Carlo aggregation, and cost sweeps.

One episode walks the world loop: ask the agent to think or act, pay the
corresponding cost, update the planner on Think, and move by the sampled
dynamics.  Experiments average many independent episodes, each seeded by
experiment seed XOR episode index, so results are reproducible bit for bit
and episodes are order-independent.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace

import numpy as np

from .baselines import AgentConfig, make_agent
from .brtdp import DEFAULT_TRIAL_LEN, init_planner, thinking_cycle
from .gridworld import DomainConfig, build_domain, heuristic_bounds
from .mdp import sample_transition
from .metareasoner import Decision
from .rng import RandomStream, episode_seed

CSV_COLUMNS = ["domain", "agent", "param", "cost_think", "cost_act",
               "episodes", "mean_cost", "stderr", "mean_thinks", "mean_acts",
               "trunc_rate", "seed"]

DECISION_LOG_COLUMNS = ["episode", "step", "state", "decision", "action",
                        "q_act", "q_nop", "voc"]

SWEEP_VALUES = (1.0, 5.0, 10.0, 15.0)


@dataclass
class ExperimentConfig:
    domain: DomainConfig
    agent: AgentConfig
    episodes: int = 1000
    k_trials_per_cycle: int = 1
    trial_len: int = DEFAULT_TRIAL_LEN
    max_decisions_per_episode: int = 10 ** 5
    seed: int = 0
    trace: bool = False

    def __post_init__(self):
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")
        if self.max_decisions_per_episode < 1:
            raise ValueError("max_decisions_per_episode must be >= 1")


@dataclass
class EpisodeStats:
    total_cost: float
    think_count: int
    act_count: int
    reached_goal: bool
    truncated: bool
    decisions: list | None = None  # per-step records when tracing
    bound_violations: int = 0  # planner backups that tried to loosen a bound


def run_episode(cfg: ExperimentConfig, rng: RandomStream,
                world=None) -> EpisodeStats:
    """One episode with a fresh planner.  ``world`` may pass a prebuilt
    (mdp, spec) pair to skip domain construction."""
    m, spec = world if world is not None else build_domain(cfg.domain)
    lower, upper = heuristic_bounds(spec, cfg.domain)
    b = init_planner(m, lower, upper)
    agent = make_agent(cfg.agent)

    s = m.start_state
    total = 0.0
    thinks = 0
    acts = 0
    records = [] if cfg.trace else None
    step = 0
    while s != m.goal_state and step < cfg.max_decisions_per_episode:
        choice = agent.step(s, m, b, b.drops, rng)
        if choice.decision is Decision.THINK:
            total += m.cost_of(s, m.nop_action)
            thinks += 1
            thinking_cycle(b, m, s, rng, k_trials=cfg.k_trials_per_cycle,
                           trial_len=cfg.trial_len)
            s_next = sample_transition(m, s, m.nop_action, rng)
        else:
            total += m.cost_of(s, choice.action)
            acts += 1
            s_next = sample_transition(m, s, choice.action, rng)
        if records is not None:
            records.append((step, s, choice.decision.value, choice.action,
                            choice.q_act, choice.q_nop, choice.voc))
        s = s_next
        step += 1
    reached = s == m.goal_state
    return EpisodeStats(total_cost=total, think_count=thinks, act_count=acts,
                        reached_goal=reached, truncated=not reached,
                        decisions=records,
                        bound_violations=b.monotone_violations)


@dataclass
class ExperimentResult:
    cfg: ExperimentConfig
    mean_cost: float
    stderr: float
    mean_thinks: float
    mean_acts: float
    trunc_rate: float
    episode_stats: list | None = None

    def csv_row(self):
        domain = self.cfg.domain.resolved()
        return {
            "domain": domain.kind,
            "agent": self.cfg.agent.label(),
            "param": self.cfg.agent.param_label(),
            "cost_think": f"{domain.cost_think:g}",
            "cost_act": f"{domain.cost_act:g}",
            "episodes": str(self.cfg.episodes),
            "mean_cost": f"{self.mean_cost:.4f}",
            "stderr": f"{self.stderr:.4f}",
            "mean_thinks": f"{self.mean_thinks:.4f}",
            "mean_acts": f"{self.mean_acts:.4f}",
            "trunc_rate": f"{self.trunc_rate:.4f}",
            "seed": str(self.cfg.seed),
        }


def run_experiment(cfg: ExperimentConfig, keep_stats=False) -> ExperimentResult:
    """Monte Carlo average over cfg.episodes independent episodes."""
    world = build_domain(cfg.domain)
    stats = []
    for i in range(cfg.episodes):
        rng = RandomStream(episode_seed(cfg.seed, i))
        stats.append(run_episode(cfg, rng, world=world))
    costs = np.array([e.total_cost for e in stats])
    stderr = (float(costs.std(ddof=1) / np.sqrt(len(costs)))
              if len(costs) > 1 else 0.0)
    return ExperimentResult(
        cfg=cfg,
        mean_cost=float(costs.mean()),
        stderr=stderr,
        mean_thinks=float(np.mean([e.think_count for e in stats])),
        mean_acts=float(np.mean([e.act_count for e in stats])),
        trunc_rate=float(np.mean([e.truncated for e in stats])),
        episode_stats=stats if keep_stats else None,
    )


def run_sweep(base_cfg: ExperimentConfig, axis, agents,
              values=SWEEP_VALUES):
    """Cost sweep: vary one cost axis over ``values`` (the other axis fixed
    at its conventional setting: act=11 when sweeping think, think=1 when
    sweeping act) for every agent.  Returns (rows, results).

    ``rows`` are CSV row dicts, one per (value, agent) cell plus one
    per-agent average row labeled param=avg; ``results`` maps
    (agent label, value) to the ExperimentResult.
    """
    if axis not in ("cost_think", "cost_act"):
        raise ValueError("axis must be cost_think or cost_act")
    rows = []
    results = {}
    for v in values:
        if axis == "cost_think":
            domain = replace(base_cfg.domain, cost_think=float(v),
                             cost_act=11.0)
        else:
            domain = replace(base_cfg.domain, cost_think=1.0,
                             cost_act=float(v))
        for agent in agents:
            cfg = replace(base_cfg, domain=domain, agent=agent)
            res = run_experiment(cfg)
            results[(agent.label(), float(v))] = res
            rows.append(res.csv_row())
    for agent in agents:
        cells = [results[(agent.label(), float(v))] for v in values]
        domain = base_cfg.domain.resolved()
        fixed = "11" if axis == "cost_think" else "1"
        row = {
            "domain": domain.kind,
            "agent": agent.label(),
            "param": "avg",
            "cost_think": "avg" if axis == "cost_think" else fixed,
            "cost_act": "avg" if axis == "cost_act" else fixed,
            "episodes": str(base_cfg.episodes),
            "mean_cost": f"{np.mean([r.mean_cost for r in cells]):.4f}",
            "stderr": f"{np.sqrt(np.mean([r.stderr ** 2 for r in cells])):.4f}",
            "mean_thinks": f"{np.mean([r.mean_thinks for r in cells]):.4f}",
            "mean_acts": f"{np.mean([r.mean_acts for r in cells]):.4f}",
            "trunc_rate": f"{np.mean([r.trunc_rate for r in cells]):.4f}",
            "seed": str(base_cfg.seed),
        }
        rows.append(row)
    return rows, results


def sweep_average(results, agent_label, values=SWEEP_VALUES):
    """Per-axis average mean cost of one agent across the swept settings."""
    return float(np.mean([results[(agent_label, float(v))].mean_cost
                          for v in values]))


def rows_to_csv(rows, columns=None):
    columns = CSV_COLUMNS if columns is None else columns
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(str(row[c]) for c in columns) + "\n")
    return buf.getvalue()


def write_csv(rows, path, columns=None):
    text = rows_to_csv(rows, columns)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return text


def decision_log_rows(stats_list):
    """Flatten traced episodes into decision-log CSV rows."""
    rows = []
    for episode, stats in enumerate(stats_list):
        if not stats.decisions:
            continue
        for step, s, decision, action, q_act, q_nop, voc in stats.decisions:
            rows.append({
                "episode": episode,
                "step": step,
                "state": s,
                "decision": decision,
                "action": "" if action is None else action,
                "q_act": "" if q_act is None else f"{q_act:.6f}",
                "q_nop": "" if q_nop is None else f"{q_nop:.6f}",
                "voc": "" if voc is None else f"{voc:.6f}",
            })
    return rows
