"""Mobile nodes random-walk until captured by a nearby transmission tower.

Towers are spatially fixed and carry distinct colors.  A free node locks the
moment some tower is within the capture radius (checked both at the start of
its turn and again after its walk step, so a node that begins a tick inside
a tower's radius is captured that tick); it takes the nearest tower's color,
ties broken by lowest tower id, and never moves again.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import colors
from ..world import ConfigError, SimError, SimState

FREE, LOCKED = 0, 1  # agent state codes used by this model


@dataclass(frozen=True)
class FlockingParams:
    n_nodes: int = 100
    n_towers: int = 3
    capture_radius: float = 3.0
    step: float = 0.1
    turn_bound: float = 45.0

    def __post_init__(self):
        if self.n_nodes < 0:
            raise ConfigError("n_nodes must be >= 0")
        if self.n_towers < 1:
            raise ConfigError("n_towers must be >= 1")
        if self.capture_radius <= 0 or self.step <= 0:
            raise ConfigError("capture_radius and step must be > 0")
        if not 0 <= self.turn_bound <= 180:
            raise ConfigError("turn_bound must be in [0, 180]")


def flocking_setup(state: SimState, params: FlockingParams, rng=None) -> None:
    """Place towers (distinct palette colors) and free nodes uniformly."""
    if state.n_alive() != 0:
        raise SimError("flocking setup needs an empty world")
    if params.n_towers > len(colors.TOWER_PALETTE):
        raise ConfigError(
            f"at most {len(colors.TOWER_PALETTE)} towers have distinct colors")
    if rng is None:
        rng = state.rng_for("setup")
    c = state.config

    tower_ids = state.create_agents("tower", params.n_towers, rng=rng)
    for i, aid in enumerate(tower_ids):
        state.place(aid, rng.uniform(c.xmin, c.xmax), rng.uniform(c.ymin, c.ymax))
        state._color[aid] = colors.TOWER_PALETTE[i]
        state._astate[aid] = LOCKED

    node_ids = state.create_agents("node", params.n_nodes, rng=rng)
    if node_ids:
        sl = np.asarray(node_ids)
        state._x[sl] = rng.uniform(c.xmin, c.xmax, size=len(sl))
        state._y[sl] = rng.uniform(c.ymin, c.ymax, size=len(sl))
        state._color[sl] = colors.NAMED["white"]
        state._astate[sl] = FREE
    state.globals["free_count"] = float(len(node_ids))


def _capture(state: SimState, node_ids: np.ndarray, params: FlockingParams,
             tx: np.ndarray, ty: np.ndarray, tcolor: np.ndarray) -> np.ndarray:
    """Lock nodes with a tower within the radius; returns the captured mask."""
    if len(node_ids) == 0:
        return np.zeros(0, dtype=bool)
    dx = np.abs(state._x[node_ids, None] - tx[None, :])
    dy = np.abs(state._y[node_ids, None] - ty[None, :])
    c = state.config
    if c.wrap:
        dx = np.minimum(dx, c.width - dx)
        dy = np.minimum(dy, c.height - dy)
    dist = np.hypot(dx, dy)
    nearest = np.argmin(dist, axis=1)  # ties resolve to the lowest tower index
    caught = dist[np.arange(len(node_ids)), nearest] <= params.capture_radius
    hit = node_ids[caught]
    state._astate[hit] = LOCKED
    state._color[hit] = tcolor[nearest[caught]]
    return caught


def flocking_tick(state: SimState, params: FlockingParams, rng) -> int:
    """One synchronous step; returns the number of still-free nodes."""
    towers = state.alive_ids("tower")
    tx, ty = state._x[towers], state._y[towers]
    tcolor = state._color[towers]
    nodes = state.alive_ids("node")
    free = nodes[state._astate[nodes] == FREE]

    caught = _capture(state, free, params, tx, ty, tcolor)
    movers = free[~caught]
    state.random_walk(movers, params.step, params.turn_bound, rng)
    _capture(state, movers, params, tx, ty, tcolor)

    free_count = int(np.sum(state._astate[nodes] == FREE))
    state.globals["free_count"] = float(free_count)
    if free_count == 0 and "assembly_ticks" not in state.globals:
        state.globals["assembly_ticks"] = float(state.tick + 1)
    return free_count
