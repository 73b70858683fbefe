"""Quickstart: one wind-grid episode with the metareasoning agent.

Builds the stochastic wind domain, runs a single episode in which the
agent decides at every step whether to keep planning (the NOP action)
or to act on the planner's current recommendation, and prints the
decision trace and the episode totals.
"""

from metaplan import (AgentConfig, DomainConfig, ExperimentConfig,
                      RandomStream, run_episode, run_experiment)
from metaplan.rng import episode_seed


def main():
    cfg = ExperimentConfig(
        domain=DomainConfig("stochastic", cost_think=1.0, cost_act=11.0),
        agent=AgentConfig("metareasoner"),
        episodes=1, seed=7, trace=True)

    stats = run_episode(cfg, RandomStream(episode_seed(cfg.seed, 0)))
    print("decision trace (step, state, decision, action, q_act, q_nop, voc):")
    for step, s, decision, action, q_act, q_nop, voc in stats.decisions[:15]:
        q_nop_s = f"{q_nop:8.2f}" if q_nop is not None else "    none"
        voc_s = f"{voc:8.2f}" if voc is not None else "    none"
        print(f"  {step:3d}  s={s:5d}  {decision:5s}  a={action}"
              f"  q_act={q_act:8.2f}  q_nop={q_nop_s}  voc={voc_s}")
    if len(stats.decisions) > 15:
        print(f"  ... {len(stats.decisions) - 15} more decisions")
    print(f"\nreached goal: {stats.reached_goal}")
    print(f"thinks: {stats.think_count}, acts: {stats.act_count}, "
          f"total cost: {stats.total_cost:.1f}")

    # averaged over episodes, against a never-thinking baseline
    for kind in ("metareasoner", "heuristic"):
        res = run_experiment(ExperimentConfig(
            domain=cfg.domain, agent=AgentConfig(kind), episodes=20, seed=7))
        print(f"{kind:13s} mean cost over 20 episodes: {res.mean_cost:8.1f}")


if __name__ == "__main__":
    main()
