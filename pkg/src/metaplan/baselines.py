"""Episode agents: the VOC metareasoners plus four fixed comparison
strategies.

Every agent answers the same per-step question, think or act, through
``agent_step``.  The metareasoners consult the VOC estimators; the
baselines use fixed schedules (think n times up front, think with
probability p, think only while uninformed, or never think at all).
"""

from __future__ import annotations

from dataclasses import dataclass

from .brtdp import BoundsState, recommended_action
from .mdp import BaseMdp
from .metareasoner import (NO_INFORMATION, Decision, DropModel, decide,
                           q_nop_estimate)

AGENT_KINDS = ("think_star_act", "prob", "no_info_think", "heuristic",
               "metareasoner", "uncorr_metareasoner")


@dataclass(frozen=True)
class AgentConfig:
    kind: str
    n_cycles: int | None = None   # think_star_act only
    p_think: float | None = None  # prob only

    def __post_init__(self):
        if self.kind not in AGENT_KINDS:
            raise ValueError(f"unknown agent kind {self.kind!r}")
        if self.kind == "think_star_act":
            if self.n_cycles is None or self.n_cycles < 0:
                raise ValueError("think_star_act needs n_cycles >= 0")
        elif self.n_cycles is not None:
            raise ValueError("n_cycles only applies to think_star_act")
        if self.kind == "prob":
            if self.p_think is None or not 0.0 <= self.p_think <= 1.0:
                raise ValueError("prob needs p_think in [0, 1]")
        elif self.p_think is not None:
            raise ValueError("p_think only applies to prob")

    def label(self):
        """Agent name for result tables, parameter included."""
        if self.kind == "think_star_act":
            return f"think_star_act(n={self.n_cycles})"
        if self.kind == "prob":
            return f"prob(p={self.p_think:g})"
        return self.kind

    def param_label(self):
        if self.kind == "think_star_act":
            return f"n={self.n_cycles}"
        if self.kind == "prob":
            return f"p={self.p_think:g}"
        return ""


@dataclass
class StepChoice:
    """One agent decision: think, or act with the given action.  The VOC
    fields are filled only by the metareasoner kinds."""
    decision: Decision
    action: int | None
    q_act: float | None = None
    q_nop: float | None = None
    voc: float | None = None


class EpisodeAgent:
    """Per-episode wrapper holding the think counter some kinds need."""

    def __init__(self, cfg: AgentConfig):
        self.cfg = cfg
        self.thinks_done = 0

    def step(self, s, m, b, d, rng) -> StepChoice:
        choice = agent_step(self.cfg, self.thinks_done, s, m, b, d, rng)
        if choice.decision is Decision.THINK:
            self.thinks_done += 1
        return choice


def make_agent(cfg: AgentConfig) -> EpisodeAgent:
    return EpisodeAgent(cfg)


def agent_step(cfg: AgentConfig, thinks_done, s, m: BaseMdp,
               b: BoundsState, d, rng) -> StepChoice:
    """One think-or-act decision.  ``thinks_done`` is the number of Think
    decisions already issued this episode (think_star_act's budget)."""
    kind = cfg.kind
    if kind == "heuristic":
        return StepChoice(Decision.ACT, recommended_action(b, m, s))
    if kind == "think_star_act":
        if thinks_done < cfg.n_cycles:
            return StepChoice(Decision.THINK, None)
        return StepChoice(Decision.ACT, recommended_action(b, m, s))
    if kind == "prob":
        if rng.uniform() < cfg.p_think:
            return StepChoice(Decision.THINK, None)
        return StepChoice(Decision.ACT, recommended_action(b, m, s))
    if kind == "no_info_think":
        if q_nop_estimate(s, m, b, d) is NO_INFORMATION:
            return StepChoice(Decision.THINK, None)
        return StepChoice(Decision.ACT, recommended_action(b, m, s))
    model = (DropModel.UNCORRELATED if kind == "uncorr_metareasoner"
             else DropModel.CORRELATED)
    est = decide(s, m, b, d, model)
    action = None if est.decision is Decision.THINK else est.action
    return StepChoice(est.decision, action, q_act=est.q_act,
                      q_nop=est.q_nop, voc=est.voc)
