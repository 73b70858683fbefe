"""Metareasoning for planning on stochastic shortest path MDPs.

The package couples an anytime bound-tracking planner with per-step
think-or-act decisions: tabular SSP MDPs and exact solvers, a BRTDP
planner with monotone bounds, value-of-computation estimators, an exact
product-MDP formulation of the scheduling problem for small instances,
wind-grid benchmark domains, baseline agents, and a Monte Carlo harness.
"""

from .baselines import AGENT_KINDS, AgentConfig, EpisodeAgent, agent_step, make_agent
from .brtdp import (DEFAULT_TRIAL_LEN, BoundsState, DropHistory, init_planner,
                    q_lower, q_upper, recommended_action, run_trial,
                    thinking_cycle)
from .gridworld import (DOMAIN_KINDS, DomainConfig, GridSpec, build_domain,
                        heuristic_bounds, make_grid_spec, resolve_move,
                        sample_wind)
from .harness import (EpisodeStats, ExperimentConfig, ExperimentResult,
                      rows_to_csv, run_episode, run_experiment, run_sweep,
                      write_csv)
from .mdp import (BaseMdp, ImproperPolicyError, MdpStructureError,
                  SolverDivergenceError, ValidationReport, bellman_backup,
                  greedy_policy, policy_evaluation, q_value,
                  sample_transition, validate_ssp, value_iteration)
from .meta_exact import (GapReport, MetaMdp, SolverTrace, construct_lollypop,
                         construct_meta_mdp, instrument_solver,
                         meta_exact_report, meta_value, metareasoning_gap_ub,
                         replace_nop_with_self_loop, solve_meta)
from .metareasoner import (NO_INFORMATION, Decision, DropModel,
                           RecommendEstimate, Segment,
                           VocEstimate, candidate_actions, decide,
                           estimate_correlated, estimate_uncorrelated,
                           q_act_estimate, q_nop_estimate)
from .rng import RandomStream, episode_seed

__version__ = "0.1.0"
