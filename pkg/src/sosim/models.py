"""Shipped models: parameter schemas, setup, per-tick behaviors, reporters.

A model owns its parameter schema (the server builds sliders from it), seeds
the world in ``setup``, and registers one named behavior plus its reporters.
``done`` lets headless runs stop early; the tick budget still caps every run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import colors
from .graph import Graph, bfs_distances, build_overlay
from .protocols import field as field_proto
from .protocols import search as search_proto
from .protocols.clustering import ClusterParams, ElectionRunner, apply_clustering, \
    cluster_setup, sensing_graph
from .protocols.field import GradientField, MobilityParams, consensus_setup, \
    consensus_mobility_tick, gradient_step
from .protocols.flocking import FlockingParams, flocking_setup, flocking_tick
from .world import ConfigError, SimState


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str  # "int" | "float" | "choice"
    default: object
    min: float | None = None
    max: float | None = None
    choices: tuple | None = None
    live: bool = False


def coerce_params(schema: list[ParamSpec], params: dict | None) -> dict:
    out = {spec.name: spec.default for spec in schema}
    by_name = {spec.name: spec for spec in schema}
    for name, value in (params or {}).items():
        if name not in by_name:
            raise ConfigError(f"unknown parameter '{name}'")
        out[name] = coerce_value(by_name[name], value)
    return out


def coerce_value(spec: ParamSpec, value):
    if spec.kind == "choice":
        if value not in spec.choices:
            raise ConfigError(f"parameter '{spec.name}' must be one of {spec.choices}")
        return value
    try:
        value = int(value) if spec.kind == "int" else float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"parameter '{spec.name}' expects a {spec.kind}")
    if spec.min is not None and value < spec.min:
        raise ConfigError(f"parameter '{spec.name}' must be >= {spec.min}")
    if spec.max is not None and value > spec.max:
        raise ConfigError(f"parameter '{spec.name}' must be <= {spec.max}")
    return value


class Model:
    name = "model"
    schema: list[ParamSpec] = []

    def __init__(self, params: dict | None = None):
        self.params = coerce_params(self.schema, params)

    def setup(self, state: SimState) -> None:
        raise NotImplementedError

    def done(self, state: SimState) -> bool:
        return False

    def set_param(self, name: str, value) -> None:
        spec = next((s for s in self.schema if s.name == name), None)
        if spec is None:
            raise ConfigError(f"unknown parameter '{name}'")
        self.params[name] = coerce_value(spec, value)

    def schema_dict(self) -> list[dict]:
        out = []
        for spec in self.schema:
            entry = {"name": spec.name, "type": spec.kind, "default": spec.default,
                     "live": spec.live}
            if spec.min is not None:
                entry["min"] = spec.min
            if spec.max is not None:
                entry["max"] = spec.max
            if spec.choices is not None:
                entry["choices"] = list(spec.choices)
            out.append(entry)
        return out


class WalkModel(Model):
    """Tutorial world: scattered turtles walk forward a small step each tick."""

    name = "walk"
    schema = [
        ParamSpec("n_nodes", "int", 100, 0, 100000),
        ParamSpec("step", "float", 0.001, 0.0, 10.0, live=True),
        ParamSpec("turn_bound", "float", 0.0, 0.0, 180.0, live=True),
    ]

    def setup(self, state: SimState) -> None:
        state.declare_breeds(["node"])
        rng = state.rng_for("setup")
        n = self.params["n_nodes"]
        c = state.config
        ids = state.create_agents("node", n, rng=rng)
        if ids:
            sl = np.asarray(ids)
            state._x[sl] = rng.integers(c.min_pxcor, c.max_pxcor + 1, size=n).astype(float)
            state._y[sl] = rng.integers(c.min_pycor, c.max_pycor + 1, size=n).astype(float)
            state._color[sl] = rng.integers(0, 140, size=n).astype(float)
        state.set_all_pcolor(float(rng.integers(0, 140)))
        state.add_behavior("walk", self._tick)
        state.register_reporter("count_nodes", lambda s: float(s.n_alive("node")))
        state.register_reporter("mean_color", self._mean_color)

    def _tick(self, state: SimState, rng) -> None:
        ids = state.alive_ids("node")
        state.random_walk(ids, self.params["step"], self.params["turn_bound"], rng)

    @staticmethod
    def _mean_color(state: SimState) -> float:
        ids = state.alive_ids("node")
        return float(state._color[ids].mean()) if len(ids) else 0.0


class FlockingModel(Model):
    """Mobile nodes random-walk until captured by a transmission tower."""

    name = "flocking"
    schema = [
        ParamSpec("n_nodes", "int", 100, 0, 20000),
        ParamSpec("n_towers", "int", 3, 1, len(colors.TOWER_PALETTE)),
        ParamSpec("capture_radius", "float", 3.0, 0.1, 50.0),
        ParamSpec("step", "float", 0.1, 0.001, 5.0, live=True),
        ParamSpec("turn_bound", "float", 45.0, 0.0, 180.0, live=True),
    ]

    def _params(self) -> FlockingParams:
        return FlockingParams(
            n_nodes=self.params["n_nodes"],
            n_towers=self.params["n_towers"],
            capture_radius=self.params["capture_radius"],
            step=self.params["step"],
            turn_bound=self.params["turn_bound"],
        )

    def setup(self, state: SimState) -> None:
        state.declare_breeds(["node", "tower"])
        flocking_setup(state, self._params(), rng=state.rng_for("setup"))
        state.add_behavior("flocking", self._tick)
        state.register_reporter("free_count", lambda s: s.globals.get("free_count", 0.0))
        state.register_reporter("assembly_ticks",
                                lambda s: s.globals.get("assembly_ticks", 0.0))

    def _tick(self, state: SimState, rng) -> None:
        flocking_tick(state, self._params(), rng)

    def done(self, state: SimState) -> bool:
        return state.globals.get("free_count", 1.0) == 0.0


class ClusteringModel(Model):
    """Lowest-ID clusterhead election, one synchronous round per tick."""

    name = "clustering"
    schema = [
        ParamSpec("n_nodes", "int", 60, 1, 5000),
        ParamSpec("sensing_radius", "float", 4.0, 0.1, 50.0),
    ]

    def setup(self, state: SimState) -> None:
        state.declare_breeds(["node"])
        params = ClusterParams(self.params["n_nodes"], self.params["sensing_radius"])
        cluster_setup(state, params, rng=state.rng_for("setup"))
        self._runner = ElectionRunner(sensing_graph(state, params.sensing_radius))
        state.globals["undecided"] = float(self.params["n_nodes"])
        state.globals["n_heads"] = 0.0
        state.globals["rounds"] = 0.0
        state.add_behavior("clustering", self._tick)
        state.register_reporter("undecided", lambda s: s.globals["undecided"])
        state.register_reporter("n_heads", lambda s: s.globals["n_heads"])
        state.register_reporter("rounds", lambda s: s.globals["rounds"])

    def _tick(self, state: SimState, rng) -> None:
        runner = self._runner
        if runner.done:
            return
        runner.round()
        state.globals["undecided"] = float(len(runner.undecided))
        state.globals["n_heads"] = float(len(runner.heads))
        state.globals["rounds"] = float(runner.rounds)
        if runner.done:
            apply_clustering(state, runner.result())

    def done(self, state: SimState) -> bool:
        return state.globals.get("undecided", 1.0) == 0.0


def _pick_source_target(graph: Graph, source: int, target: int, rng) -> tuple[int, int]:
    nodes = graph.nodes
    src = int(nodes[int(rng.integers(0, len(nodes)))]) if source < 0 else int(source)
    if src not in graph.adj:
        raise ConfigError(f"source {src} not in the overlay")
    if target >= 0:
        tgt = int(target)
    else:
        others = [v for v in nodes if v != src] or [src]
        tgt = int(others[int(rng.integers(0, len(others)))])
    if tgt not in graph.adj:
        raise ConfigError(f"target {tgt} not in the overlay")
    return src, tgt


_OVERLAY_SCHEMA = [
    ParamSpec("overlay", "choice", "lattice", choices=("lattice", "random")),
    ParamSpec("rows", "int", 10, 1, 100),
    ParamSpec("cols", "int", 10, 1, 100),
    ParamSpec("n", "int", 100, 1, 5000),
    ParamSpec("p", "float", 0.05, 0.0, 1.0),
    ParamSpec("source", "int", -1, -1, 1 << 31),
    ParamSpec("target", "int", -1, -1, 1 << 31),
]


class _OverlayModel(Model):
    def _build_graph(self, state: SimState) -> Graph:
        kind = self.params["overlay"]
        if kind == "lattice":
            g = build_overlay("lattice", {"rows": self.params["rows"],
                                          "cols": self.params["cols"]}, 0)
            layout = "grid"
        else:
            g = build_overlay("random", {"n": self.params["n"], "p": self.params["p"],
                                         "require_connected": True},
                              state.config.seed)
            layout = "circle"
        self.graph = g
        self.embedding = search_proto.embed_overlay(state, g, layout)
        return g


class ExpandingRingModel(_OverlayModel):
    """Expanding-ring search animated one flood level per tick."""

    name = "expanding-ring"
    schema = _OVERLAY_SCHEMA + [ParamSpec("ttl_max_rings", "int", 32, 1, 128)]

    def setup(self, state: SimState) -> None:
        state.declare_breeds(["node"])
        rng = state.rng_for("setup")
        g = self._build_graph(state)
        src, tgt = _pick_source_target(g, self.params["source"], self.params["target"], rng)
        self.search = search_proto.RingSearch(
            g, search_proto.QueryConfig(src, frozenset([tgt]),
                                        ttl_max_rings=self.params["ttl_max_rings"]))
        self._recolor(state, src, tgt)
        state.add_behavior("expanding-ring", self._tick)
        for name in ("success", "messages", "checks", "hops", "rings", "ring_ttl"):
            state.register_reporter(name, (lambda key: lambda s: s.globals.get(key, 0.0))(name))
        self._publish(state)

    def _recolor(self, state: SimState, src: int, tgt: int) -> None:
        self.src, self.tgt = src, tgt
        ids = np.asarray(list(self.embedding.values()))
        state._color[ids] = colors.NAMED["gray"]
        state._color[self.embedding[tgt]] = colors.NAMED["green"]
        state._color[self.embedding[src]] = colors.NAMED["blue"]

    def _publish(self, state: SimState) -> None:
        s = self.search
        state.globals["messages"] = float(s.messages + (0 if s.finished else s.flood.messages))
        state.globals["ring_ttl"] = float(s.ttls[s.ring_index])
        state.globals["checks"] = 0.0
        state.globals["rings"] = float(s.ring_index + 1)
        state.globals["hops"] = float(s.flood.level if s.flood.found else 0)
        state.globals["success"] = float(bool(s.flood.found))

    def _tick(self, state: SimState, rng) -> None:
        if self.search.finished:
            return
        before = set(self.search.flood.visited)
        ring_before = self.search.ring_index
        self.search.step()
        if self.search.ring_index != ring_before:
            self._recolor(state, self.src, self.tgt)
        else:
            for v in self.search.flood.visited - before:
                if v != self.tgt:
                    state._color[self.embedding[v]] = colors.NAMED["yellow"]
        self._publish(state)

    def done(self, state: SimState) -> bool:
        return self.search.finished


class KWalkModel(_OverlayModel):
    """k random walkers with check-back, one synchronous round per tick."""

    name = "k-walk"
    schema = [
        ParamSpec("overlay", "choice", "random", choices=("lattice", "random")),
    ] + _OVERLAY_SCHEMA[1:] + [
        ParamSpec("k", "int", 16, 1, 256),
        ParamSpec("check_interval", "int", 4, 1, 1000),
        ParamSpec("ttl_max", "int", 1000, 1, 100000),
    ]

    def setup(self, state: SimState) -> None:
        state.declare_breeds(["node", "walker"])
        rng = state.rng_for("setup")
        g = self._build_graph(state)
        src, tgt = _pick_source_target(g, self.params["source"], self.params["target"], rng)
        self.src, self.tgt = src, tgt
        w = search_proto.WalkConfig(self.params["k"], self.params["check_interval"],
                                    self.params["ttl_max"])
        self.walk = search_proto.WalkRun(g, src, frozenset([tgt]), w, rng)
        ids = np.asarray(list(self.embedding.values()))
        state._color[ids] = colors.NAMED["gray"]
        state._color[self.embedding[tgt]] = colors.NAMED["green"]
        state._color[self.embedding[src]] = colors.NAMED["blue"]
        self.walker_ids = state.create_agents("walker", w.k, rng=rng)
        for aid in self.walker_ids:
            agent = state.agent(aid)
            agent.color = colors.NAMED["red"]
            agent.setxy(*state.agent(self.embedding[src]).position)
        state.add_behavior("k-walk", self._tick)
        for name in ("success", "messages", "checks", "hops", "rings", "walkers_alive"):
            state.register_reporter(name, (lambda key: lambda s: s.globals.get(key, 0.0))(name))
        self._publish(state)

    def _publish(self, state: SimState) -> None:
        w = self.walk
        state.globals["messages"] = float(w.moves)
        state.globals["checks"] = float(w.checks)
        state.globals["success"] = float(w.success_hops is not None)
        state.globals["hops"] = float(w.success_hops or 0)
        state.globals["rings"] = 0.0
        state.globals["walkers_alive"] = float(sum(w.alive))

    def _tick(self, state: SimState, rng) -> None:
        if self.walk.active:
            self.walk.step()
            for i, aid in enumerate(self.walker_ids):
                node_agent = self.embedding[self.walk.pos[i]]
                state.place(aid, *state.agent(node_agent).position)
        self._publish(state)

    def done(self, state: SimState) -> bool:
        return not self.walk.active


class GradientModel(Model):
    """Hop-count gradient around sensor sources, one relaxation per tick."""

    name = "gradient"
    schema = [
        ParamSpec("n_nodes", "int", 100, 1, 5000),
        ParamSpec("radius", "float", 4.0, 0.1, 50.0),
        ParamSpec("n_sources", "int", 1, 1, 50),
        ParamSpec("relocate_every", "int", 0, 0, 100000),
    ]

    def setup(self, state: SimState) -> None:
        state.declare_breeds(["node", "sensor"])
        rng = state.rng_for("setup")
        c = state.config
        n = self.params["n_nodes"]
        ids = state.create_agents("node", n, rng=rng)
        sl = np.asarray(ids)
        state._x[sl] = rng.uniform(c.xmin, c.xmax, size=n)
        state._y[sl] = rng.uniform(c.ymin, c.ymax, size=n)
        self.graph = sensing_graph(state, self.params["radius"])
        sources = sorted(int(v) for v in
                         rng.choice(np.asarray(ids), size=self.params["n_sources"],
                                    replace=False))
        self.field = GradientField.initial(self.graph, sources)
        self._paint(state)
        state.add_behavior("gradient", self._tick)
        for name in ("changed", "max_finite", "unreached"):
            state.register_reporter(name, (lambda key: lambda s: s.globals.get(key, 0.0))(name))
        state.globals["changed"] = float(n)

    def _paint(self, state: SimState) -> None:
        for v, value in self.field.values.items():
            if v in self.field.sources:
                state._color[v] = colors.NAMED["red"]
            elif value == field_proto.INF:
                state._color[v] = colors.NAMED["gray"]
            else:
                state._color[v] = 15.0 + 10.0 * (value % 13.0)

    def _tick(self, state: SimState, rng) -> None:
        every = self.params["relocate_every"]
        if every and state.tick > 0 and state.tick % every == 0:
            ids = self.graph.nodes
            sources = sorted(int(v) for v in
                             rng.choice(np.asarray(ids), size=self.params["n_sources"],
                                        replace=False))
            # stale values are kept on purpose; the relaxation heals them
            self.field = GradientField(dict(self.field.values), frozenset(sources))
        new = gradient_step(self.field, self.graph)
        changed = sum(1 for v in new.values if new.values[v] != self.field.values[v])
        self.field = new
        self._paint(state)
        finite = [v for v in new.values.values() if v != field_proto.INF]
        state.globals["changed"] = float(changed)
        state.globals["max_finite"] = float(max(finite)) if finite else 0.0
        state.globals["unreached"] = float(len(new.values) - len(finite))

    def done(self, state: SimState) -> bool:
        return not self.params["relocate_every"] and state.globals.get("changed", 1.0) == 0.0


class ConsensusModel(Model):
    """Distributed averaging under mobility churn."""

    name = "consensus"
    schema = [
        ParamSpec("n_nodes", "int", 200, 1, 20000),
        ParamSpec("radius", "float", 3.0, 0.1, 50.0),
        ParamSpec("step", "float", 0.5, 0.0, 5.0, live=True),
        ParamSpec("turn_bound", "float", 45.0, 0.0, 180.0, live=True),
        ParamSpec("value_max", "float", 100.0, 1.0, 1e6),
    ]

    def _params(self) -> MobilityParams:
        return MobilityParams(
            n_nodes=self.params["n_nodes"],
            radius=self.params["radius"],
            step=self.params["step"],
            turn_bound=self.params["turn_bound"],
            value_max=self.params["value_max"],
        )

    def setup(self, state: SimState) -> None:
        state.declare_breeds(["node"])
        consensus_setup(state, self._params(), rng=state.rng_for("setup"))
        state.add_behavior("consensus", self._tick)
        state.register_reporter("range", lambda s: s.globals.get("range", 0.0))
        state.register_reporter("variance", lambda s: s.globals.get("variance", 0.0))
        state.register_reporter("mean", lambda s: s.globals.get("mean", 0.0))

    def _tick(self, state: SimState, rng) -> None:
        consensus_mobility_tick(state, self._params(), rng)


_REGISTRY = {
    cls.name: cls
    for cls in (WalkModel, FlockingModel, ClusteringModel, ExpandingRingModel,
                KWalkModel, GradientModel, ConsensusModel)
}

MODEL_NAMES = tuple(sorted(_REGISTRY))


def make_model(name: str, params: dict | None = None) -> Model:
    cls = _REGISTRY.get(name)
    if cls is None:
        raise ConfigError(f"unknown model '{name}'; available: {', '.join(MODEL_NAMES)}")
    return cls(params)
