"""Wind-grid benchmark domains.

Four layouts on a 100x100 grid.  The agent moves 11 cells per step while
the wind pushes 10, so an agent moving against the wind still nets one
cell of progress.  Wind direction names denote the *push* direction.

- stochastic: northerly prevailing wind mixed 60% north / 20% east /
  20% west, except the easternmost column (holding start and goal) where
  a steady southerly headwind blows.  NOP stays in place.
- traps: the stochastic layout with think/act costs 10/11, both raised to
  100 at the start cell.
- dynamicnop1: easterly push along the southern row, northerly along the
  eastern column, elsewhere westerly that flips to northerly 20% of the
  time.  NOP drifts with the wind; thinking costs a flat 1.
- dynamicnop2: dynamicnop1 plus a deterministic easterly push along the
  northern row.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .mdp import BaseMdp

# action order: N, S, E, W, NOP
ACTION_NAMES = ["N", "S", "E", "W", "NOP"]
NOP = 4
MOVE_VECS = {0: (0, 1), 1: (0, -1), 2: (1, 0), 3: (-1, 0)}
DIR_VECS = {"N": (0, 1), "S": (0, -1), "E": (1, 0), "W": (-1, 0)}

DOMAIN_KINDS = ("stochastic", "traps", "dynamicnop1", "dynamicnop2")

TRAPS_START_SURCHARGE = 100.0


@dataclass(frozen=True)
class DomainConfig:
    kind: str
    cost_think: float | None = None
    cost_act: float | None = None
    upper_heuristic_scale: float | None = None

    def resolved(self):
        """Fill in per-kind defaults."""
        if self.kind not in DOMAIN_KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        think = self.cost_think
        act = self.cost_act
        if think is None:
            think = 10.0 if self.kind == "traps" else 1.0
        if act is None:
            act = 11.0
        scale = self.upper_heuristic_scale
        if scale is None:
            # the scaled Manhattan distance must stay a monotone upper
            # bound, so the scale covers the worst per-step cost
            scale = max(act, TRAPS_START_SURCHARGE) if self.kind == "traps" else act
        if think <= 0 or act <= 0 or scale <= 0:
            raise ValueError("cost and scale parameters must be positive")
        return DomainConfig(self.kind, float(think), float(act), float(scale))


@dataclass
class GridSpec:
    width: int
    height: int
    move_cells: int
    wind_cells: int
    wind_field: list          # per cell: list of ((dx, dy), probability)
    nop_dynamics: str         # "stay_in_place" | "drift_with_wind"
    cost_think: np.ndarray    # per cell
    cost_act: np.ndarray      # per cell
    start_cell: tuple
    goal_cell: tuple

    def cell_index(self, x, y):
        return y * self.width + x

    def cell_xy(self, s):
        return s % self.width, s // self.width

    def clamp(self, x, y):
        return (min(max(x, 0), self.width - 1),
                min(max(y, 0), self.height - 1))

    def manhattan_to_goal(self, x, y):
        gx, gy = self.goal_cell
        return abs(gx - x) + abs(gy - y)


def _wind_field(kind, width, height):
    field = []
    n, s, e, w = DIR_VECS["N"], DIR_VECS["S"], DIR_VECS["E"], DIR_VECS["W"]
    for y in range(height):
        for x in range(width):
            if kind in ("stochastic", "traps"):
                if x == width - 1:
                    # start/goal column: steady southerly headwind; this is
                    # what makes the Manhattan heuristic grind straight up
                    # the column at one net cell per step
                    field.append([(s, 1.0)])
                else:
                    field.append([(n, 0.6), (e, 0.2), (w, 0.2)])
            else:
                if x == width - 1:
                    field.append([(n, 1.0)])
                elif y == 0:
                    field.append([(e, 1.0)])
                elif y == height - 1 and kind == "dynamicnop2":
                    field.append([(e, 1.0)])
                else:
                    field.append([(w, 0.8), (n, 0.2)])
    return field


def make_grid_spec(cfg: DomainConfig, width=100, height=100,
                   move_cells=11, wind_cells=10) -> GridSpec:
    cfg = cfg.resolved()
    if not move_cells > wind_cells >= 0:
        raise ValueError("need move_cells > wind_cells >= 0")
    n_cells = width * height
    cost_think = np.full(n_cells, cfg.cost_think)
    cost_act = np.full(n_cells, cfg.cost_act)
    if cfg.kind in ("stochastic", "traps"):
        start = (width - 1, 0)
    else:
        start = (width - 2, 1)
    goal = (width - 1, height - 1)
    if cfg.kind == "traps":
        start_idx = start[1] * width + start[0]
        cost_think[start_idx] = TRAPS_START_SURCHARGE
        cost_act[start_idx] = TRAPS_START_SURCHARGE
    nop_dynamics = ("stay_in_place" if cfg.kind in ("stochastic", "traps")
                    else "drift_with_wind")
    return GridSpec(width=width, height=height, move_cells=move_cells,
                    wind_cells=wind_cells,
                    wind_field=_wind_field(cfg.kind, width, height),
                    nop_dynamics=nop_dynamics,
                    cost_think=cost_think, cost_act=cost_act,
                    start_cell=start, goal_cell=goal)


def resolve_move(spec: GridSpec, cell, action, wind_push):
    """Landing cell for one step: agent vector plus wind vector, clamped to
    the grid.  The wind can slow the agent but never reverse it; the
    pre-clamp displacement along the chosen axis is asserted to be at least
    move_cells - wind_cells."""
    x, y = cell
    wx, wy = wind_push
    if action == NOP:
        if spec.nop_dynamics == "stay_in_place":
            return cell
        return spec.clamp(x + spec.wind_cells * wx, y + spec.wind_cells * wy)
    dx, dy = MOVE_VECS[action]
    nx = x + spec.move_cells * dx + spec.wind_cells * wx
    ny = y + spec.move_cells * dy + spec.wind_cells * wy
    net = (nx - x) * dx + (ny - y) * dy
    assert net >= spec.move_cells - spec.wind_cells, \
        "wind reversed the agent's intent"
    return spec.clamp(nx, ny)


def sample_wind(spec: GridSpec, cell, rng):
    """Draw a wind push vector from the cell's mixture."""
    mixture = spec.wind_field[spec.cell_index(*cell)]
    u = rng.uniform()
    acc = 0.0
    for vec, p in mixture:
        acc += p
        if u < acc:
            return vec
    return mixture[-1][0]


def _outcomes(spec: GridSpec, cell, action):
    """Aggregated successor distribution of one (cell, action) pair."""
    if action == NOP and spec.nop_dynamics == "stay_in_place":
        return {spec.cell_index(*cell): 1.0}
    dist = {}
    for vec, p in spec.wind_field[spec.cell_index(*cell)]:
        landing = resolve_move(spec, cell, action, vec)
        idx = spec.cell_index(*landing)
        dist[idx] = dist.get(idx, 0.0) + p
    return dist


def build_domain(cfg: DomainConfig):
    """Build one of the four benchmark SSP MDPs.  Returns (mdp, spec)."""
    cfg = cfg.resolved()
    return _build_cached(cfg.kind, cfg.cost_think, cfg.cost_act,
                         cfg.upper_heuristic_scale)


@lru_cache(maxsize=32)
def _build_cached(kind, cost_think, cost_act, scale):
    cfg = DomainConfig(kind, cost_think, cost_act, scale)
    spec = make_grid_spec(cfg)
    goal_idx = spec.cell_index(*spec.goal_cell)
    transitions = {}
    costs = {}
    for y in range(spec.height):
        for x in range(spec.width):
            s = spec.cell_index(x, y)
            if s == goal_idx:
                for a in range(5):
                    transitions[(s, a)] = [(s, 1.0)]
                continue
            for a in range(5):
                dist = _outcomes(spec, (x, y), a)
                transitions[(s, a)] = sorted(dist.items())
                costs[(s, a)] = (spec.cost_think[s] if a == NOP
                                 else spec.cost_act[s])
    mdp = BaseMdp(state_count=spec.width * spec.height, action_count=5,
                  nop_action=NOP,
                  start_state=spec.cell_index(*spec.start_cell),
                  goal_state=goal_idx,
                  transitions=transitions, costs=costs)
    return mdp, spec


def heuristic_bounds(spec: GridSpec, cfg: DomainConfig):
    """Zero lower bound and scaled-Manhattan upper bound."""
    cfg = cfg.resolved()
    n = spec.width * spec.height
    lower = np.zeros(n)
    upper = np.empty(n)
    for y in range(spec.height):
        for x in range(spec.width):
            upper[spec.cell_index(x, y)] = \
                cfg.upper_heuristic_scale * spec.manhattan_to_goal(x, y)
    return lower, upper
