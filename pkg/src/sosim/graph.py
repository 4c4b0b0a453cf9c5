"""Simple undirected graphs for overlay and field protocols.

Nodes are integer ids (not necessarily dense); neighbor lists are kept
sorted so every traversal is deterministic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .rng import generator
from .world import ConfigError


@dataclass
class Graph:
    adj: dict[int, list[int]]
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_edges(cls, nodes, edges, meta=None) -> "Graph":
        adj: dict[int, list[int]] = {int(v): [] for v in nodes}
        seen = set()
        for a, b in edges:
            a, b = int(a), int(b)
            if a == b:
                raise ConfigError("self-loops are not allowed")
            key = (min(a, b), max(a, b))
            if key in seen:
                continue
            seen.add(key)
            adj[a].append(b)
            adj[b].append(a)
        for v in adj:
            adj[v].sort()
        return cls(adj, meta or {})

    @property
    def nodes(self) -> list[int]:
        return sorted(self.adj)

    @property
    def n(self) -> int:
        return len(self.adj)

    def neighbors(self, v: int) -> list[int]:
        return self.adj[v]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def max_degree(self) -> int:
        return max((len(ns) for ns in self.adj.values()), default=0)

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for v in self.nodes:
            for u in self.adj[v]:
                if v < u:
                    out.append((v, u))
        return out

    def n_edges(self) -> int:
        return sum(len(ns) for ns in self.adj.values()) // 2

    def has_edge(self, a: int, b: int) -> bool:
        return b in self.adj.get(a, ())


def bfs_distances(graph: Graph, sources) -> dict[int, int]:
    """Hop distance from the nearest source; unreachable nodes are absent."""
    dist: dict[int, int] = {}
    q: deque[int] = deque()
    for s in sorted(set(int(s) for s in sources)):
        dist[s] = 0
        q.append(s)
    while q:
        v = q.popleft()
        for u in graph.adj[v]:
            if u not in dist:
                dist[u] = dist[v] + 1
                q.append(u)
    return dist


def is_connected(graph: Graph) -> bool:
    if graph.n == 0:
        return True
    return len(bfs_distances(graph, [graph.nodes[0]])) == graph.n


def diameter(graph: Graph) -> int:
    """Longest shortest path; raises on disconnected graphs."""
    best = 0
    for v in graph.nodes:
        dist = bfs_distances(graph, [v])
        if len(dist) != graph.n:
            raise ConfigError("diameter of a disconnected graph")
        best = max(best, max(dist.values()))
    return best


def lattice(rows: int, cols: int) -> Graph:
    """Non-wrapping 4-neighbor grid; node id = row*cols + col."""
    if rows < 1 or cols < 1:
        raise ConfigError("lattice needs rows, cols >= 1")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph.from_edges(range(rows * cols), edges, meta={"rows": rows, "cols": cols})


def random_graph(n: int, p: float, seed: int, require_connected: bool = False,
                 max_retries: int = 50) -> Graph:
    """Erdos-Renyi G(n, p); deterministic for fixed (n, p, seed)."""
    if n < 1:
        raise ConfigError("random graph needs n >= 1")
    if not 0.0 <= p <= 1.0:
        raise ConfigError("edge probability must be in [0, 1]")
    rng = generator(seed)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for _ in range(max_retries):
        draws = rng.random(len(pairs)) if pairs else np.empty(0)
        edges = [pairs[k] for k in np.flatnonzero(draws < p)]
        g = Graph.from_edges(range(n), edges, meta={"n": n, "p": p})
        if not require_connected or is_connected(g):
            return g
    raise ConfigError(f"no connected G({n}, {p}) found in {max_retries} tries")


def random_geometric(n: int, radius: float, box: float, seed: int,
                     require_connected: bool = False, max_retries: int = 50) -> Graph:
    """Uniform points in a ``box`` x ``box`` square, edge iff distance <= radius."""
    if n < 1:
        raise ConfigError("geometric graph needs n >= 1")
    rng = generator(seed)
    for _ in range(max_retries):
        xs = rng.uniform(0.0, box, size=n)
        ys = rng.uniform(0.0, box, size=n)
        edges = []
        for i in range(n):
            d2 = (xs[i + 1:] - xs[i]) ** 2 + (ys[i + 1:] - ys[i]) ** 2
            for j in np.flatnonzero(d2 <= radius * radius):
                edges.append((i, i + 1 + int(j)))
        g = Graph.from_edges(range(n), edges, meta={"n": n, "radius": radius})
        if not require_connected or is_connected(g):
            return g
    raise ConfigError(f"no connected geometric graph found in {max_retries} tries")


def build_overlay(kind: str, params: dict, seed: int) -> Graph:
    """Overlay factory: ``lattice`` (rows, cols) or ``random`` (n, p, ...)."""
    if kind == "lattice":
        return lattice(int(params.get("rows", 10)), int(params.get("cols", 10)))
    if kind == "random":
        return random_graph(
            int(params.get("n", 100)),
            float(params.get("p", 0.05)),
            seed,
            require_connected=bool(params.get("require_connected", False)),
            max_retries=int(params.get("max_retries", 50)),
        )
    raise ConfigError(f"unknown overlay kind '{kind}'")
