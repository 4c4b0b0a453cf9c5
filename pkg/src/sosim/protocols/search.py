"""Unstructured overlay search: expanding-ring flooding and k-random-walk.

Cost model for floods: a node first reached at level L forwards the query to
every neighbor except the single neighbor it received it from (the source
forwards to all neighbors).  Every send costs one message, including
duplicate deliveries to already-visited nodes; duplicates are not forwarded.
The message count is independent of which same-level sender is treated as
the parent, since every non-source node excludes exactly one neighbor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import generator
from ..graph import Graph
from ..world import ConfigError, SimError, SimState


@dataclass(frozen=True)
class QueryConfig:
    source: int
    targets: frozenset
    ttl_sequence: tuple[int, ...] | None = None
    ttl_max_rings: int = 32

    def __post_init__(self):
        if not self.targets:
            raise ConfigError("a query needs at least one target")
        if self.ttl_sequence is not None:
            seq = self.ttl_sequence
            if not seq or any(t < 1 for t in seq) or any(b <= a for a, b in zip(seq, seq[1:])):
                raise ConfigError("ttl_sequence must be strictly increasing positive integers")
        elif self.ttl_max_rings < 1:
            raise ConfigError("ttl_max_rings must be >= 1")

    def ttls(self) -> tuple[int, ...]:
        if self.ttl_sequence is not None:
            return self.ttl_sequence
        return tuple(2 * i - 1 for i in range(1, self.ttl_max_rings + 1))


@dataclass(frozen=True)
class WalkConfig:
    k: int = 16
    check_interval: int = 4
    ttl_max: int = 1000

    def __post_init__(self):
        if self.k < 1 or self.check_interval < 1 or self.ttl_max < 1:
            raise ConfigError("walk parameters must be >= 1")


@dataclass
class RingOutcome:
    found: bool
    messages: int
    levels_expanded: int
    hops_to_hit: int | None = None


@dataclass
class SearchOutcome:
    success: bool
    messages: int
    check_messages: int
    hops_to_hit: int | None
    rings_used: int | None
    ticks: int


class FloodRun:
    """One flood, advanced one synchronous level per step.

    Expansion stops after completing the level at which a target is first
    reached; nodes at that level send nothing.  Every flood starts from a
    fresh visited set.
    """

    def __init__(self, graph: Graph, source: int, targets, ttl: int):
        if ttl < 1:
            raise SimError("ttl must be >= 1")
        if source not in graph.adj:
            raise SimError(f"source {source} not in the overlay")
        self.graph = graph
        self.source = source
        self.targets = set(targets)
        self.ttl = ttl
        self.visited = {source}
        self.frontier = [source]
        self.messages = 0
        self.level = 0
        self.found = source in self.targets
        self.active = not self.found

    def step(self) -> bool:
        """Expand one level; returns False once the flood is finished."""
        if not self.active:
            return False
        adj = self.graph.adj
        if not self.frontier or self.level >= self.ttl:
            self.active = False
            return False
        self.messages += sum(
            len(adj[v]) - (0 if v == self.source else 1) for v in self.frontier)
        nxt = []
        for v in self.frontier:
            for u in adj[v]:
                if u not in self.visited:
                    self.visited.add(u)
                    nxt.append(u)
        if not nxt:
            self.frontier = []
            self.active = False
            return False
        self.level += 1
        self.frontier = nxt
        if self.targets.intersection(nxt):
            self.found = True
            self.active = False
            return False
        if self.level >= self.ttl:
            self.active = False
            return False
        return True

    def outcome(self) -> RingOutcome:
        return RingOutcome(self.found, self.messages, self.level,
                           self.level if self.found else None)


def flood_with_ttl(graph: Graph, source: int, targets, ttl: int) -> RingOutcome:
    """Synchronous level-by-level flood with hop budget ``ttl``."""
    run = FloodRun(graph, source, targets, ttl)
    while run.step():
        pass
    return run.outcome()


class RingSearch:
    """Expanding-ring driver: grows the TTL (1, 3, 5, ... by default) over
    independent floods until a target is hit; one flood level per step."""

    def __init__(self, graph: Graph, q: QueryConfig):
        if q.source not in graph.adj:
            raise SimError(f"source {q.source} not in the overlay")
        self.graph = graph
        self.q = q
        self.ttls = q.ttls()
        self.ring_index = 0
        self.messages = 0
        self._done_levels = 0
        self.flood = FloodRun(graph, q.source, q.targets, self.ttls[0])
        self.finished = not self.flood.active

    @property
    def ticks(self) -> int:
        return self._done_levels + self.flood.level

    def step(self) -> bool:
        """Advance one flood level (or start the next ring); False when done."""
        if self.finished:
            return False
        self.flood.step()
        if self.flood.active:
            return True
        self.messages += self.flood.messages
        if self.flood.found or self.ring_index + 1 >= len(self.ttls):
            self.finished = True
            return False
        self._done_levels += self.flood.level
        self.ring_index += 1
        self.flood = FloodRun(self.graph, self.q.source, self.q.targets,
                              self.ttls[self.ring_index])
        return True

    def outcome(self) -> SearchOutcome:
        ring = self.flood.outcome()
        if ring.found:
            return SearchOutcome(True, self.messages, 0, ring.hops_to_hit,
                                 self.ring_index + 1, self.ticks)
        return SearchOutcome(False, self.messages, 0, None, None, self.ticks)


def expanding_ring_search(graph: Graph, q: QueryConfig) -> SearchOutcome:
    """Run rings to completion; messages accumulate over every ring executed."""
    search = RingSearch(graph, q)
    while search.step():
        pass
    return search.outcome()


class WalkRun:
    """k synchronized random walkers with periodic check-back to the source.

    Walkers move on their own RNG substreams with backtracking allowed.
    Landing on a target reports success to the source instantly and retires
    the walker; every walker emits one check message after each
    ``check_interval``-th hop (per-walker checks are exactly
    floor(hops/check_interval)) and retires at a check once success is
    known, or when its hop budget runs out.
    """

    def __init__(self, graph: Graph, source: int, targets, w: WalkConfig, rng):
        self.graph = graph
        self.source = source
        self.targets = set(targets)
        self.w = w
        self.moves = 0
        self.checks = 0
        self.success_hops: int | None = None
        self.ticks = 0
        if source in self.targets:
            self.success_hops = 0
            self.alive = [False] * w.k
            self.pos = [source] * w.k
            self.hops = [0] * w.k
            return
        if source not in graph.adj:
            raise SimError(f"source {source} not in the overlay")
        self.pos = [source] * w.k
        self.hops = [0] * w.k
        if not graph.adj[source]:
            self.alive = [False] * w.k
            return
        seeds = rng.integers(0, 1 << 63, size=w.k)
        self.gens = [generator(int(s)) for s in seeds]
        self.alive = [True] * w.k

    @property
    def active(self) -> bool:
        return any(self.alive)

    def step(self) -> bool:
        """One synchronous round of walker moves; False when all retired."""
        if not self.active:
            return False
        adj = self.graph.adj
        w = self.w
        self.ticks += 1
        for i in range(w.k):
            if not self.alive[i]:
                continue
            nbrs = adj[self.pos[i]]
            self.pos[i] = nbrs[int(self.gens[i].integers(0, len(nbrs)))]
            self.hops[i] += 1
            self.moves += 1
            at_check = self.hops[i] % w.check_interval == 0
            if at_check:
                self.checks += 1
            if self.pos[i] in self.targets:
                if self.success_hops is None:
                    self.success_hops = self.hops[i]
                self.alive[i] = False
            elif at_check and self.success_hops is not None:
                self.alive[i] = False
            elif self.hops[i] >= w.ttl_max:
                self.alive[i] = False
        return self.active

    def outcome(self) -> SearchOutcome:
        return SearchOutcome(self.success_hops is not None, self.moves,
                             self.checks, self.success_hops, None, self.ticks)


def k_random_walk(graph: Graph, source: int, targets, w: WalkConfig, rng) -> SearchOutcome:
    """Run the walkers to completion; ``rng`` seeds the per-walker substreams."""
    run = WalkRun(graph, source, targets, w, rng)
    while run.step():
        pass
    return run.outcome()


def embed_overlay(state: SimState, graph: Graph, layout: str = "grid",
                  breed: str = "node", rng=None) -> dict[int, int]:
    """Create one agent per overlay node and one link per edge for display.

    Layouts: ``grid`` (row-major integer grid, using lattice dims when the
    graph carries them), ``circle``, ``random``.  Returns node id -> agent id.
    """
    nodes = graph.nodes
    mapping: dict[int, int] = {}
    if not nodes:
        return mapping
    c = state.config
    if layout == "grid":
        cols = graph.meta.get("cols") or int(np.ceil(np.sqrt(len(nodes))))
        rows = (len(nodes) + cols - 1) // cols
        positions = []
        for k in range(len(nodes)):
            r, col = divmod(k, cols)
            positions.append((float(col - cols // 2), float(rows // 2 - r)))
    elif layout == "circle":
        radius = min(c.width, c.height) / 2.0 - 1.0
        positions = [
            (radius * float(np.cos(2 * np.pi * k / len(nodes))),
             radius * float(np.sin(2 * np.pi * k / len(nodes))))
            for k in range(len(nodes))
        ]
    elif layout == "random":
        if rng is None:
            rng = state.rng_for("embed")
        xs = rng.uniform(c.xmin, c.xmax, size=len(nodes))
        ys = rng.uniform(c.ymin, c.ymax, size=len(nodes))
        positions = list(zip(xs.tolist(), ys.tolist()))
    else:
        raise ConfigError(f"unknown layout '{layout}'")
    if not c.wrap:
        for x, y in positions:
            if not (c.xmin <= x < c.xmax and c.ymin <= y < c.ymax):
                raise ConfigError("overlay does not fit the non-wrapped world")
    ids = state.create_agents(breed, len(nodes), rng=rng)
    for node, aid, (x, y) in zip(nodes, ids, positions):
        state.place(aid, x, y)
        mapping[node] = aid
    for a, b in graph.edges():
        state.create_link(mapping[a], mapping[b])
    return mapping
