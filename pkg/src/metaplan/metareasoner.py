"""Value-of-computation estimation and the think-vs-act decision rule.

The agent compares the projected value of acting on the planner's current
recommendation against the projected value of one more thinking cycle.
Both use the same probabilistic projection of the next upper bounds: the
last observed drop bounds the next one, which is drawn either independently
per action (uncorrelated model) or by a shared drop fraction (correlated
model).  Only the two most promising actions per state are ever compared,
keeping each decision linear in the number of actions.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import _kernels
from .brtdp import (BoundsState, DropHistory, nop_successors, q_lower,
                    q_upper, recommended_action)
from .mdp import BaseMdp


class DropModel(Enum):
    UNCORRELATED = "uncorrelated"
    CORRELATED = "correlated"


class Decision(Enum):
    THINK = "think"
    ACT = "act"


#: Sentinel returned by q_nop_estimate when a NOP-successor has no drop
#: history yet; forces a Think decision upstream.
NO_INFORMATION = object()


@dataclass(frozen=True)
class Segment:
    """Projected range of one action's next upper-bound Q-value: the bound
    currently sits at ``hi`` and may drop by at most ``drop``."""
    action: int
    hi: float
    drop: float

    def __post_init__(self):
        if self.drop < 0:
            raise ValueError("drop must be nonnegative")


@dataclass
class RecommendEstimate:
    """Per-action probability of being recommended after one more cycle and
    the conditional expectation of its projected bound."""
    actions: list[int]
    p: list[float]
    e: list[float]

    def inner_value(self):
        return sum(pa * ea for pa, ea in zip(self.p, self.e))


@dataclass
class VocEstimate:
    q_act: float
    q_nop: float | None
    voc: float | None
    decision: Decision
    action: int
    no_information: bool = False


def projected_drop(s, a, m: BaseMdp, b: BoundsState, d: DropHistory):
    """Last observed drop, floored so the projected next upper bound never
    falls below the current lower bound (the planner's bounds bracket the
    optimum, so a further drop can never cross the lower bound)."""
    cap = q_upper(b, m, s, a) - q_lower(b, m, s, a)
    if cap < 0.0:
        cap = 0.0
    drop = d.drop_or_zero(s, a)
    return drop if drop < cap else cap


def candidate_actions(s, m: BaseMdp, b: BoundsState, d: DropHistory):
    """The <= 2 non-NOP actions with the lowest projected next bound
    u = Q_upper - last drop (missing drops rank as 0); ties break toward
    the lower action index."""
    scored = []
    for a in range(m.action_count):
        if a == m.nop_action or not m.is_enabled(s, a):
            continue
        u = q_upper(b, m, s, a) - projected_drop(s, a, m, b, d)
        scored.append((u, a))
    scored.sort()
    return [a for _, a in scored[:2]]


def estimate_uncorrelated(segments) -> RecommendEstimate:
    """Independent-uniform drop model, closed form for <= 2 segments."""
    return _estimate(segments, _kernels.uncorrelated_two)


def estimate_correlated(segments) -> RecommendEstimate:
    """Shared drop-fraction model: all bounds slide together by a single
    uniform fraction of their last drops."""
    return _estimate(segments, _kernels.correlated_two)


def _estimate(segments, two_fn) -> RecommendEstimate:
    if not segments:
        raise ValueError("at least one segment is required")
    if len(segments) > 2:
        raise ValueError("estimators operate on the pruned <= 2 segments")
    if len(segments) == 1:
        (seg,) = segments
        return RecommendEstimate([seg.action], [1.0], [seg.hi - 0.5 * seg.drop])
    s1, s2 = segments
    p1, e1, p2, e2 = two_fn(s1.hi, s1.drop, s2.hi, s2.drop)
    return RecommendEstimate([s1.action, s2.action],
                             [float(p1), float(p2)], [float(e1), float(e2)])


def _segments_for(s, m, b, d):
    actions = candidate_actions(s, m, b, d)
    if any(not d.has(s, a) for a in actions):
        return None
    return [Segment(a, q_upper(b, m, s, a), projected_drop(s, a, m, b, d))
            for a in actions]


def q_nop_estimate(s, m: BaseMdp, b: BoundsState, d: DropHistory,
                   model: DropModel = DropModel.CORRELATED):
    """Projected Q of thinking once: the NOP cost plus, for each state the
    NOP may lead to, the expected projected value of the action the planner
    will then recommend.  Returns NO_INFORMATION when any NOP-successor
    still lacks drop records for a candidate action."""
    estimator = (estimate_correlated if model is DropModel.CORRELATED
                 else estimate_uncorrelated)
    total = m.cost_of(s, m.nop_action)
    for succ, p in m.support(s, m.nop_action):
        segments = _segments_for(succ, m, b, d)
        if segments is None:
            return NO_INFORMATION
        total += p * estimator(segments).inner_value()
    return total


def q_act_estimate(s, m: BaseMdp, b: BoundsState, d: DropHistory):
    """Projected Q of acting now: the recommended action's upper bound at
    the midpoint of its projected drop (identical under both models)."""
    f = recommended_action(b, m, s)
    return q_upper(b, m, s, f) - 0.5 * projected_drop(s, f, m, b, d)


def decide(s, m: BaseMdp, b: BoundsState, d: DropHistory,
           model: DropModel = DropModel.CORRELATED) -> VocEstimate:
    """Think iff the value of computation is strictly positive, or the
    no-information rule fires; otherwise act on the recommendation."""
    f = recommended_action(b, m, s)
    q_act = q_act_estimate(s, m, b, d)
    q_nop = q_nop_estimate(s, m, b, d, model)
    if q_nop is NO_INFORMATION:
        return VocEstimate(q_act=q_act, q_nop=None, voc=None,
                           decision=Decision.THINK, action=f,
                           no_information=True)
    voc = q_act - q_nop
    decision = Decision.THINK if voc > 0 else Decision.ACT
    return VocEstimate(q_act=q_act, q_nop=q_nop, voc=voc,
                       decision=decision, action=f)
