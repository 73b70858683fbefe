"""Command line front end.

Subcommands:
  run        one Monte Carlo experiment, CSV row out
  sweep      think-cost or act-cost sweep over the standard settings
  gap        heuristic-vs-optimal gap report for a benchmark domain
  meta-exact exact meta analysis of a small MDP given as JSON
  validate   SSP validity check of an MDP given as JSON

Options come from an optional JSON config file plus flag overrides.
"""

from __future__ import annotations

import argparse
import json
import sys

from .baselines import AgentConfig
from .gridworld import DOMAIN_KINDS, DomainConfig, build_domain, heuristic_bounds
from .harness import (ExperimentConfig, decision_log_rows, run_experiment,
                      run_sweep, rows_to_csv, write_csv,
                      DECISION_LOG_COLUMNS)
from .mdp import BaseMdp, validate_ssp
from .meta_exact import meta_exact_report, metareasoning_gap_ub


def _load_config(path):
    if path is None:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _merged(doc, args, key, flag_value, default=None):
    if flag_value is not None:
        return flag_value
    return doc.get(key, default)


def _experiment_config(args):
    doc = _load_config(args.config)
    domain_doc = doc.get("domain", {})
    agent_doc = doc.get("agent", {})
    kind = args.domain or domain_doc.get("kind")
    if kind is None:
        raise SystemExit("a domain is required (--domain or config file)")
    domain = DomainConfig(
        kind=kind,
        cost_think=(args.cost_think if args.cost_think is not None
                    else domain_doc.get("cost_think")),
        cost_act=(args.cost_act if args.cost_act is not None
                  else domain_doc.get("cost_act")),
        upper_heuristic_scale=domain_doc.get("upper_heuristic_scale"),
    )
    agent_kind = args.agent or agent_doc.get("kind", "metareasoner")
    n = args.n if args.n is not None else agent_doc.get("n")
    p = args.p if args.p is not None else agent_doc.get("p")
    agent = AgentConfig(kind=agent_kind, n_cycles=n, p_think=p)
    return ExperimentConfig(
        domain=domain, agent=agent,
        episodes=int(_merged(doc, args, "episodes", args.episodes, 1000)),
        k_trials_per_cycle=int(doc.get("k_trials_per_cycle", 1)),
        max_decisions_per_episode=int(doc.get("max_decisions_per_episode",
                                              10 ** 5)),
        seed=int(_merged(doc, args, "seed", args.seed, 0)),
        trace=bool(args.trace or doc.get("trace", False)),
    )


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_run(args):
    cfg = _experiment_config(args)
    res = run_experiment(cfg, keep_stats=cfg.trace)
    _emit(rows_to_csv([res.csv_row()]), args.out)
    if cfg.trace:
        log = rows_to_csv(decision_log_rows(res.episode_stats),
                          DECISION_LOG_COLUMNS)
        path = (args.out + ".decisions.csv") if args.out else None
        _emit(log, path)
    return 0


def cmd_sweep(args):
    cfg = _experiment_config(args)
    agents = _sweep_agents(args)
    rows, _ = run_sweep(cfg, args.axis, agents)
    _emit(rows_to_csv(rows), args.out)
    return 0


def _sweep_agents(args):
    if args.agent:
        n = args.n if args.agent == "think_star_act" else None
        p = args.p if args.agent == "prob" else None
        return [AgentConfig(args.agent, n_cycles=n, p_think=p)]
    agents = [AgentConfig("metareasoner"), AgentConfig("uncorr_metareasoner"),
              AgentConfig("no_info_think"), AgentConfig("heuristic")]
    agents += [AgentConfig("think_star_act", n_cycles=n) for n in (1, 5, 25)]
    agents += [AgentConfig("prob", p_think=p) for p in (0.1, 0.25, 0.5)]
    return agents


def cmd_gap(args):
    kinds = [args.domain] if args.domain else list(DOMAIN_KINDS)
    report = {}
    for kind in kinds:
        cfg = DomainConfig(kind=kind, cost_think=args.cost_think,
                           cost_act=args.cost_act)
        m, spec = build_domain(cfg)
        _, upper = heuristic_bounds(spec, cfg)
        gap = metareasoning_gap_ub(m, upper)
        report[kind] = {
            "heuristic_cost": gap.heuristic_cost,
            "optimal_cost": gap.optimal_cost,
            "mg_ub": gap.mg_ub if gap.defined else None,
        }
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return 0


def _read_mdp(path):
    with open(path) as fh:
        return BaseMdp.from_json_dict(json.load(fh))


def cmd_meta_exact(args):
    m = _read_mdp(args.mdp)
    report = meta_exact_report(m)
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return 0


def cmd_validate(args):
    m = _read_mdp(args.mdp)
    report = validate_ssp(m)
    doc = {
        "is_ssp": report.is_ssp,
        "proper_policy_found": report.proper_policy_found,
        "messages": report.messages,
    }
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return 0 if report.is_ssp else 1


def _add_common(p):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--domain", choices=DOMAIN_KINDS)
    p.add_argument("--agent")
    p.add_argument("--n", type=int, help="think_star_act cycle count")
    p.add_argument("--p", type=float, help="prob think probability")
    p.add_argument("--cost-think", dest="cost_think", type=float)
    p.add_argument("--cost-act", dest="cost_act", type=float)
    p.add_argument("--episodes", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--trace", action="store_true",
                   help="also emit a per-decision log")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="metaplan",
        description="Plan/act metareasoning experiments on SSP MDPs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment")
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a cost sweep")
    _add_common(p)
    p.add_argument("--axis", choices=("cost_think", "cost_act"),
                   default="cost_think")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gap", help="heuristic vs optimal gap per domain")
    _add_common(p)
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("meta-exact", help="exact meta analysis of an MDP JSON")
    p.add_argument("mdp", help="MDP JSON file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_meta_exact)

    p = sub.add_parser("validate", help="SSP validity check of an MDP JSON")
    p.add_argument("mdp", help="MDP JSON file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
