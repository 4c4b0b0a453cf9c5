"""Lowest-ID clusterhead election over a sensing-radius graph.

Election runs in synchronous rounds: every undecided node that is a local id
minimum among itself and its undecided neighbors declares itself a head;
undecided neighbors of new heads become members.  The head set is the
id-greedy maximal independent set; each member is affiliated with its
lowest-id adjacent head once the head set is final.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..graph import Graph
from ..world import ConfigError, SimState


@dataclass(frozen=True)
class ClusterParams:
    n_nodes: int = 60
    sensing_radius: float = 4.0

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ConfigError("n_nodes must be >= 1")
        if self.sensing_radius <= 0:
            raise ConfigError("sensing_radius must be > 0")


@dataclass
class Clustering:
    heads: frozenset
    membership: dict[int, int]
    rounds: int


def radius_pairs(state: SimState, ids: np.ndarray, radius: float) -> np.ndarray:
    """Index pairs (into ``ids``) within toroidal distance <= radius, in
    canonical lexicographic order."""
    if len(ids) == 0:
        return np.empty((0, 2), dtype=np.int64)
    c = state.config
    pts = np.column_stack([state._x[ids] - c.xmin, state._y[ids] - c.ymin])
    if c.wrap:
        tree = cKDTree(pts, boxsize=[c.width, c.height])
    else:
        tree = cKDTree(pts)
    pairs = tree.query_pairs(radius, output_type="ndarray")
    if len(pairs):
        pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    return pairs


def sensing_graph(state: SimState, radius: float, breed: str | None = "node") -> Graph:
    """Undirected graph over live agents: edge iff toroidal distance <= radius."""
    if radius <= 0:
        raise ConfigError("sensing radius must be > 0")
    ids = state.alive_ids(breed)
    pairs = radius_pairs(state, ids, radius)
    edges = [(int(ids[i]), int(ids[j])) for i, j in pairs]
    return Graph.from_edges((int(v) for v in ids), edges)


class ElectionRunner:
    """Round-by-round driver for the synchronous lowest-ID election."""

    def __init__(self, graph: Graph):
        self.graph = graph
        self.undecided = set(graph.nodes)
        self.heads: set[int] = set()
        self.rounds = 0

    @property
    def done(self) -> bool:
        return not self.undecided

    def round(self) -> bool:
        """One synchronous round; returns False once everyone has decided."""
        if self.done:
            return False
        self.rounds += 1
        new_heads = [
            v for v in self.undecided
            if all(v < u for u in self.graph.adj[v] if u in self.undecided)
        ]
        for h in new_heads:
            self.undecided.discard(h)
            self.heads.add(h)
        newly_member = set()
        for h in new_heads:
            for u in self.graph.adj[h]:
                if u in self.undecided:
                    newly_member.add(u)
        self.undecided -= newly_member
        return not self.done

    def result(self) -> Clustering:
        if not self.done:
            raise ConfigError("election still has undecided nodes")
        membership = {
            v: min(u for u in self.graph.adj[v] if u in self.heads)
            for v in self.graph.nodes if v not in self.heads
        }
        return Clustering(frozenset(self.heads), membership, self.rounds)


def elect_lowest_id(graph: Graph) -> Clustering:
    """Synchronous lowest-ID election on an arbitrary graph."""
    runner = ElectionRunner(graph)
    while runner.round():
        pass
    return runner.result()


def cluster_setup(state: SimState, params: ClusterParams, rng=None) -> None:
    """Scatter undecided nodes uniformly over the world."""
    if rng is None:
        rng = state.rng_for("setup")
    c = state.config
    ids = state.create_agents("node", params.n_nodes, rng=rng)
    sl = np.asarray(ids)
    state._x[sl] = rng.uniform(c.xmin, c.xmax, size=len(sl))
    state._y[sl] = rng.uniform(c.ymin, c.ymax, size=len(sl))
    state._astate[sl] = 4  # undecided
    state._color[sl] = 5.0


def cluster_election(state: SimState, params: ClusterParams) -> Clustering:
    """Run the election over the sensing graph of the placed nodes."""
    graph = sensing_graph(state, params.sensing_radius)
    result = elect_lowest_id(graph)
    apply_clustering(state, result)
    return result


def apply_clustering(state: SimState, clustering: Clustering) -> None:
    from .. import colors

    palette = colors.TOWER_PALETTE
    head_color = {h: palette[i % len(palette)] for i, h in enumerate(sorted(clustering.heads))}
    for h in clustering.heads:
        state._astate[h] = 2  # head
        state._color[h] = head_color[h]
    for v, h in clustering.membership.items():
        state._astate[v] = 3  # member
        state._color[v] = head_color[h] - 2.0
