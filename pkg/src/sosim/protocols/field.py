"""Hop-count gradient fields and distributed neighbor averaging.

The gradient relaxation recomputes every value from scratch each step
(sources pin to 0, everyone else takes 1 + min over neighbors), so stale
underestimates rise and the field self-heals after sources move or the
topology changes; the fixed point is the exact hop distance to the nearest
source.  Averaging uses the Laplacian step x' = x + eps * sum(x_u - x_v),
which conserves the mean and contracts the value range whenever
eps <= 1/(1 + max degree).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..graph import Graph
from ..world import ConfigError, SimError, SimState

INF = math.inf


@dataclass
class GradientField:
    values: dict[int, float]
    sources: frozenset

    @classmethod
    def initial(cls, graph: Graph, sources, values: dict[int, float] | None = None) -> "GradientField":
        sources = frozenset(int(s) for s in sources)
        if not sources.issubset(graph.adj.keys()):
            raise ConfigError("sources must be nodes of the graph")
        vals = {v: INF for v in graph.nodes}
        if values:
            vals.update({int(k): float(x) for k, x in values.items()})
        for s in sources:
            vals[s] = 0.0
        return cls(vals, sources)


@dataclass
class GradientRun:
    field: GradientField
    steps: int
    converged: bool


def gradient_step(field: GradientField, graph: Graph) -> GradientField:
    """One synchronous relaxation; values may rise, which heals staleness."""
    old = field.values
    new: dict[int, float] = {}
    for v in graph.nodes:
        if v in field.sources:
            new[v] = 0.0
        else:
            nbrs = graph.adj[v]
            new[v] = min((old[u] + 1.0 for u in nbrs), default=INF)
    return GradientField(new, field.sources)


def gradient_run(field: GradientField, graph: Graph, max_steps: int) -> GradientRun:
    """Iterate until no value changes or ``max_steps``; counts changing steps."""
    if max_steps < 1:
        raise SimError("max_steps must be >= 1")
    steps = 0
    for _ in range(max_steps):
        nxt = gradient_step(field, graph)
        if nxt.values == field.values:
            return GradientRun(field, steps, True)
        field = nxt
        steps += 1
    nxt = gradient_step(field, graph)
    return GradientRun(field, steps, nxt.values == field.values)


@dataclass
class ConsensusState:
    values: np.ndarray  # aligned with graph.nodes order
    epsilon: float


def max_safe_epsilon(graph: Graph) -> float:
    return 1.0 / (1.0 + graph.max_degree())


def consensus_step(cs: ConsensusState, graph: Graph) -> ConsensusState:
    """Synchronous averaging step; requires 0 < epsilon <= 1/(1 + max degree)."""
    if not 0.0 < cs.epsilon <= max_safe_epsilon(graph) + 1e-15:
        raise SimError(
            f"epsilon {cs.epsilon} outside (0, {max_safe_epsilon(graph)}] for this graph")
    nodes = graph.nodes
    index = {v: i for i, v in enumerate(nodes)}
    x = np.asarray(cs.values, dtype=float)
    if len(x) != len(nodes):
        raise SimError("value vector does not match the graph")
    delta = np.zeros_like(x)
    for a, b in graph.edges():
        ia, ib = index[a], index[b]
        d = x[ib] - x[ia]
        delta[ia] += d
        delta[ib] -= d
    return ConsensusState(x + cs.epsilon * delta, cs.epsilon)


@dataclass(frozen=True)
class MobilityParams:
    n_nodes: int = 200
    radius: float = 3.0
    step: float = 0.5
    turn_bound: float = 45.0
    value_max: float = 100.0

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ConfigError("n_nodes must be >= 1")
        if self.radius <= 0:
            raise ConfigError("radius must be > 0")
        if self.step < 0:
            raise ConfigError("step must be >= 0")


def consensus_setup(state: SimState, params: MobilityParams, rng=None) -> None:
    """Scatter nodes with uniform initial values in [0, value_max)."""
    if rng is None:
        rng = state.rng_for("setup")
    c = state.config
    ids = state.create_agents("node", params.n_nodes, rng=rng)
    sl = np.asarray(ids)
    state._x[sl] = rng.uniform(c.xmin, c.xmax, size=len(sl))
    state._y[sl] = rng.uniform(c.ymin, c.ymax, size=len(sl))
    values = rng.uniform(0.0, params.value_max, size=len(sl))
    state.var_array("value")[sl] = values
    state._color[sl] = np.clip(values * 1.4, 0.0, 139.9)


def consensus_mobility_tick(state: SimState, params: MobilityParams, rng) -> tuple[float, float]:
    """Walk every node, rebuild the interaction graph, average once.

    The step weight is chosen as 1/(1 + max current degree), which keeps the
    update a convex combination under churn.  Returns (range, variance).
    """
    from .clustering import radius_pairs

    ids = state.alive_ids("node")
    state.random_walk(ids, params.step, params.turn_bound, rng)
    pairs = radius_pairs(state, ids, params.radius)
    vals = state.var_array("value")
    x = vals[ids]
    if len(pairs):
        deg = np.bincount(pairs.ravel(), minlength=len(ids))
        eps = 1.0 / (1.0 + float(deg.max()))
        ia, ib = pairs[:, 0], pairs[:, 1]
        delta = np.zeros_like(x)
        d = x[ib] - x[ia]
        np.add.at(delta, ia, d)
        np.add.at(delta, ib, -d)
        x = x + eps * delta
        vals[ids] = x
    state._color[ids] = np.clip(x * 1.4, 0.0, 139.9)
    value_range = float(x.max() - x.min()) if len(x) else 0.0
    variance = float(x.var()) if len(x) else 0.0
    state.globals["range"] = value_range
    state.globals["variance"] = variance
    state.globals["mean"] = float(x.mean()) if len(x) else 0.0
    return value_range, variance
