"""Benchmark comparison across agents and domains at desk scale.

Runs every agent on each wind-grid domain for a modest number of
episodes and prints a cost table.  The full-scale version of this table
(1000 episodes per cell, thinking-cost and acting-cost sweeps) is what
`metaplan sweep` produces; this script keeps the runtime to about a
minute on one core.

Usage: python demos/benchmark_comparison.py [episodes]
"""

import sys

from metaplan import AgentConfig, DomainConfig, ExperimentConfig, run_experiment

AGENTS = [
    AgentConfig("metareasoner"),
    AgentConfig("uncorr_metareasoner"),
    AgentConfig("no_info_think"),
    AgentConfig("think_star_act", n_cycles=5),
    AgentConfig("prob", p_think=0.25),
    AgentConfig("heuristic"),
]

DOMAINS = ["stochastic", "traps", "dynamicnop1", "dynamicnop2"]


def main(episodes=50):
    header = f"{'agent':26s}" + "".join(f"{d:>13s}" for d in DOMAINS)
    print(header)
    print("-" * len(header))
    for agent in AGENTS:
        cells = []
        for kind in DOMAINS:
            cfg = ExperimentConfig(domain=DomainConfig(kind), agent=agent,
                                   episodes=episodes, seed=1)
            cells.append(run_experiment(cfg).mean_cost)
        print(f"{agent.label():26s}" + "".join(f"{c:13.1f}" for c in cells))
    print(f"\n({episodes} episodes per cell, mean total cost, lower is "
          f"better)")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 50)
