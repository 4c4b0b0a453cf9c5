"""Tick-driven world: patches, agents, links, toroidal geometry, seeded RNG.

Agents live in a struct-of-arrays store so that behaviors over thousands of
agents can run vectorized, while per-agent ``Agent`` handles keep the
interactive semantics (console, asks) simple.  Agent ids are dense, start at
0, and are never reused within a run; the id doubles as the row index.
"""

from __future__ import annotations

import hashlib
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import colors
from .rng import generator, substream_seed


class SimError(Exception):
    """Base class for simulator errors."""


class ConfigError(SimError):
    pass


class UnknownAgentError(SimError):
    pass


class UnknownVariableError(SimError):
    pass


class BreedError(SimError):
    pass


class AskError(SimError):
    """An ask action failed; carries the offending agent id."""

    def __init__(self, agent_id: int, cause: Exception):
        super().__init__(f"ask action failed for agent {agent_id}: {cause}")
        self.agent_id = agent_id
        self.cause = cause


class BehaviorError(SimError):
    """A registered behavior raised; the tick is aborted and the run failed."""

    def __init__(self, behavior: str, tick: int, cause: Exception):
        super().__init__(f"behavior '{behavior}' failed at tick {tick}: {cause}")
        self.behavior = behavior
        self.tick = tick
        self.cause = cause


AGENT_STATES = ("free", "locked", "head", "member", "undecided")
_STATE_CODE = {name: i for i, name in enumerate(AGENT_STATES)}


@dataclass(frozen=True)
class WorldConfig:
    """World dimensions, wrap mode, and the seed that fixes the whole run."""

    width: int = 33
    height: int = 33
    wrap: bool = True
    seed: int = 42
    max_ticks: int | None = None

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ConfigError(f"world dimensions must be >= 1, got {self.width}x{self.height}")
        if not (0 <= int(self.seed) <= (1 << 64) - 1):
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.max_ticks is not None and self.max_ticks < 0:
            raise ConfigError("max_ticks must be >= 0 or None")

    # Continuous coordinates span [-width/2, width/2) x [-height/2, height/2);
    # patch centers sit on the integers.
    @property
    def xmin(self) -> float:
        return -self.width / 2.0

    @property
    def xmax(self) -> float:
        return self.width / 2.0

    @property
    def ymin(self) -> float:
        return -self.height / 2.0

    @property
    def ymax(self) -> float:
        return self.height / 2.0

    @property
    def min_pxcor(self) -> int:
        return -(self.width // 2)

    @property
    def max_pxcor(self) -> int:
        return self.width - self.width // 2 - 1

    @property
    def min_pycor(self) -> int:
        return -(self.height // 2)

    @property
    def max_pycor(self) -> int:
        return self.height - self.height // 2 - 1


@dataclass
class TickReport:
    tick: int
    behavior_seconds: dict[str, float]
    counters: dict[str, float]


class _AgentVars:
    """Mapping view over one agent's custom variables."""

    __slots__ = ("_state", "_aid")

    def __init__(self, state: "SimState", aid: int):
        self._state = state
        self._aid = aid

    def __getitem__(self, name: str) -> float:
        arr = self._state._vars.get(name)
        if arr is None:
            raise UnknownVariableError(f"unknown variable {name}")
        return float(arr[self._aid])

    def __setitem__(self, name: str, value: float) -> None:
        self._state.var_array(name)[self._aid] = float(value)

    def __contains__(self, name: str) -> bool:
        return name in self._state._vars

    def keys(self):
        return self._state._vars.keys()


class Agent:
    """Handle onto one row of the agent store."""

    __slots__ = ("_state", "id")

    def __init__(self, state: "SimState", aid: int):
        self._state = state
        self.id = aid

    @property
    def breed(self) -> str:
        return self._state._breed_names[self._state._breed[self.id]]

    @property
    def x(self) -> float:
        return float(self._state._x[self.id])

    @property
    def y(self) -> float:
        return float(self._state._y[self.id])

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)

    @property
    def heading(self) -> float:
        return float(self._state._heading[self.id])

    @heading.setter
    def heading(self, value: float) -> None:
        self._state._heading[self.id] = float(value) % 360.0

    @property
    def color(self) -> float:
        return float(self._state._color[self.id])

    @color.setter
    def color(self, value: float) -> None:
        self._state._color[self.id] = colors.wrap(value)

    @property
    def state(self) -> str:
        return AGENT_STATES[self._state._astate[self.id]]

    @state.setter
    def state(self, value: str) -> None:
        self._state._astate[self.id] = _STATE_CODE[value]

    @property
    def alive(self) -> bool:
        return bool(self._state._alive[self.id])

    @property
    def vars(self) -> _AgentVars:
        return _AgentVars(self._state, self.id)

    def setxy(self, x: float, y: float) -> None:
        self._state.place(self.id, x, y)

    def fd(self, step: float) -> tuple[float, float]:
        return self._state.move_forward(self.id, step)

    def turn(self, delta: float) -> float:
        return self._state.turn(self.id, delta)

    def __repr__(self) -> str:
        return f"Agent({self.id}, {self.breed}, x={self.x:.3f}, y={self.y:.3f})"


@dataclass(frozen=True)
class Patch:
    pxcor: int
    pycor: int
    pcolor: float


def _fmt(x: float) -> str:
    """Canonical decimal rendering: 17 significant digits round-trips floats."""
    return "%.17g" % x


class SimState:
    """The whole world: grid, agents, links, globals, behaviors, series."""

    def __init__(self, config: WorldConfig):
        self.config = config
        self.tick = 0
        self.globals: dict[str, float] = {}
        self.behaviors: list[tuple[str, object]] = []
        self.reporters: list[tuple[str, object]] = []
        self.series: dict[str, list] = {}
        self.series_ticks: list[int] = []
        self._seq: dict[tuple[str, int], int] = {}
        self._breed_names: list[str] = []
        self._breed_codes: dict[str, int] = {}
        self._closed_breeds = False
        self._init_store()
        self._init_patches()

    # ------------------------------------------------------------------
    # storage
    # ------------------------------------------------------------------

    def _init_store(self, capacity: int = 256) -> None:
        self._cap = capacity
        self._n = 0
        self._x = np.zeros(capacity)
        self._y = np.zeros(capacity)
        self._heading = np.zeros(capacity)
        self._color = np.zeros(capacity)
        self._breed = np.zeros(capacity, dtype=np.int16)
        self._astate = np.zeros(capacity, dtype=np.int8)
        self._alive = np.zeros(capacity, dtype=bool)
        self._vars: dict[str, np.ndarray] = {}
        self._adj: dict[int, set[int]] = {}
        self._link_weight: dict[tuple[int, int], float] = {}

    def _init_patches(self) -> None:
        self.pcolor = np.zeros((self.config.height, self.config.width))
        self.patch_vars: dict[str, np.ndarray] = {}

    def _grow(self, need: int) -> None:
        cap = self._cap
        while cap < need:
            cap *= 2
        for name in ("_x", "_y", "_heading", "_color", "_breed", "_astate", "_alive"):
            old = getattr(self, name)
            new = np.zeros(cap, dtype=old.dtype)
            new[: self._n] = old[: self._n]
            setattr(self, name, new)
        for vname, old in self._vars.items():
            new = np.zeros(cap)
            new[: self._n] = old[: self._n]
            self._vars[vname] = new
        self._cap = cap

    @property
    def n_patches(self) -> int:
        return self.config.width * self.config.height

    def declare_breeds(self, names: list[str], closed: bool = True) -> None:
        """Register the run's breeds; with closed=True unknown breeds error."""
        for name in names:
            self._breed_code(name, registering=True)
        self._closed_breeds = closed

    def _breed_code(self, name: str, registering: bool = False) -> int:
        code = self._breed_codes.get(name)
        if code is None:
            if self._closed_breeds and not registering:
                raise BreedError(f"unknown breed '{name}'")
            code = len(self._breed_names)
            self._breed_names.append(name)
            self._breed_codes[name] = code
        return code

    def var_array(self, name: str) -> np.ndarray:
        """Array backing a custom agent variable, created zero-filled on first write."""
        arr = self._vars.get(name)
        if arr is None:
            arr = np.zeros(self._cap)
            self._vars[name] = arr
        return arr

    def has_var(self, name: str) -> bool:
        return name in self._vars

    # ------------------------------------------------------------------
    # agents
    # ------------------------------------------------------------------

    def create_agents(self, breed: str, count: int, init=None, rng=None) -> list[int]:
        """Create ``count`` agents of ``breed`` with fresh consecutive ids.

        Headings default to a uniform draw in [0, 360) from the run's RNG;
        positions default to the origin.  ``init(agent)`` runs once per new
        agent in creation order.
        """
        if count < 0:
            raise ConfigError("count must be >= 0")
        code = self._breed_code(breed)
        if count == 0:
            return []
        if rng is None:
            rng = self.rng_for("create")
        first = self._n
        self._grow(first + count)
        self._n += count
        ids = list(range(first, first + count))
        sl = slice(first, first + count)
        self._breed[sl] = code
        self._alive[sl] = True
        self._astate[sl] = 0
        self._x[sl] = 0.0
        self._y[sl] = 0.0
        self._color[sl] = 0.0
        self._heading[sl] = rng.uniform(0.0, 360.0, size=count)
        if init is not None:
            for aid in ids:
                init(Agent(self, aid))
        return ids

    def agent(self, aid: int) -> Agent:
        if not self.is_alive(aid):
            raise UnknownAgentError(f"no live agent with id {aid}")
        return Agent(self, int(aid))

    def is_alive(self, aid) -> bool:
        aid = int(aid)
        return 0 <= aid < self._n and bool(self._alive[aid])

    def kill(self, aid: int) -> None:
        if not self.is_alive(aid):
            raise UnknownAgentError(f"no live agent with id {aid}")
        aid = int(aid)
        self._alive[aid] = False
        for other in list(self._adj.get(aid, ())):
            self._unlink(aid, other)

    def alive_ids(self, breed: str | None = None) -> np.ndarray:
        mask = self._alive[: self._n]
        if breed is not None:
            code = self._breed_codes.get(breed)
            if code is None:
                return np.empty(0, dtype=np.int64)
            mask = mask & (self._breed[: self._n] == code)
        return np.flatnonzero(mask)

    def n_alive(self, breed: str | None = None) -> int:
        return int(len(self.alive_ids(breed)))

    # ------------------------------------------------------------------
    # geometry
    # ------------------------------------------------------------------

    def _wrap_x(self, x):
        c = self.config
        return (x - c.xmin) % c.width + c.xmin

    def _wrap_y(self, y):
        c = self.config
        return (y - c.ymin) % c.height + c.ymin

    def place(self, aid: int, x: float, y: float) -> None:
        """Set an agent's position, wrapping into bounds on a wrapped world."""
        if not self.is_alive(aid):
            raise UnknownAgentError(f"no live agent with id {aid}")
        c = self.config
        if c.wrap:
            if x < c.xmin or x >= c.xmax:
                x = self._wrap_x(x)
            if y < c.ymin or y >= c.ymax:
                y = self._wrap_y(y)
        elif not (c.xmin <= x < c.xmax and c.ymin <= y < c.ymax):
            raise SimError(f"position ({x}, {y}) outside the non-wrapped world")
        self._x[aid] = x
        self._y[aid] = y

    def move_forward(self, aid: int, step: float) -> tuple[float, float]:
        """Advance an agent by ``step`` along its heading (0 = north, clockwise).

        Wrapped worlds wrap torus-style; otherwise the move truncates at the
        wall and the heading reflects.
        """
        if not self.is_alive(aid):
            raise UnknownAgentError(f"no live agent with id {aid}")
        aid = int(aid)
        h = math.radians(self._heading[aid])
        nx = self._x[aid] + step * math.sin(h)
        ny = self._y[aid] + step * math.cos(h)
        c = self.config
        if c.wrap:
            # wrap only on boundary crossings so in-bounds moves stay exact
            if nx < c.xmin or nx >= c.xmax:
                nx = self._wrap_x(nx)
            if ny < c.ymin or ny >= c.ymax:
                ny = self._wrap_y(ny)
        else:
            heading = self._heading[aid]
            if nx < c.xmin or nx >= c.xmax:
                nx = min(max(nx, c.xmin), np.nextafter(c.xmax, -np.inf))
                heading = (-heading) % 360.0
            if ny < c.ymin or ny >= c.ymax:
                ny = min(max(ny, c.ymin), np.nextafter(c.ymax, -np.inf))
                heading = (180.0 - heading) % 360.0
            self._heading[aid] = heading
        self._x[aid] = nx
        self._y[aid] = ny
        return (float(nx), float(ny))

    def turn(self, aid: int, delta: float) -> float:
        if not self.is_alive(aid):
            raise UnknownAgentError(f"no live agent with id {aid}")
        aid = int(aid)
        h = (self._heading[aid] + delta) % 360.0
        self._heading[aid] = h
        return float(h)

    def toroidal_distance(self, p: tuple[float, float], q: tuple[float, float]) -> float:
        """Euclidean distance with per-axis wraparound shortcut when wrap=true."""
        dx = abs(p[0] - q[0])
        dy = abs(p[1] - q[1])
        c = self.config
        if c.wrap:
            dx = min(dx, c.width - dx)
            dy = min(dy, c.height - dy)
        return math.hypot(dx, dy)

    def distances_from(self, point: tuple[float, float], ids: np.ndarray) -> np.ndarray:
        """Vectorized toroidal distances from ``point`` to the given agents."""
        dx = np.abs(self._x[ids] - point[0])
        dy = np.abs(self._y[ids] - point[1])
        c = self.config
        if c.wrap:
            dx = np.minimum(dx, c.width - dx)
            dy = np.minimum(dy, c.height - dy)
        return np.hypot(dx, dy)

    def random_walk(self, ids: np.ndarray, step: float, turn_bound: float, rng) -> None:
        """Turn each agent by a uniform draw in [-turn_bound, +turn_bound], then
        move it forward by ``step``; draws happen in ascending id order."""
        if len(ids) == 0:
            return
        h = self._heading[ids]
        if turn_bound > 0.0:
            h = (h + rng.uniform(-turn_bound, turn_bound, size=len(ids))) % 360.0
            self._heading[ids] = h
        rad = np.radians(h)
        nx = self._x[ids] + step * np.sin(rad)
        ny = self._y[ids] + step * np.cos(rad)
        c = self.config
        if c.wrap:
            out = (nx < c.xmin) | (nx >= c.xmax)
            if out.any():
                nx = np.where(out, (nx - c.xmin) % c.width + c.xmin, nx)
            out = (ny < c.ymin) | (ny >= c.ymax)
            if out.any():
                ny = np.where(out, (ny - c.ymin) % c.height + c.ymin, ny)
        else:
            xlo, xhi = nx < c.xmin, nx >= c.xmax
            ylo, yhi = ny < c.ymin, ny >= c.ymax
            xref = xlo | xhi
            yref = ylo | yhi
            nx = np.clip(nx, c.xmin, np.nextafter(c.xmax, -np.inf))
            ny = np.clip(ny, c.ymin, np.nextafter(c.ymax, -np.inf))
            if xref.any():
                h = np.where(xref, (-h) % 360.0, h)
            if yref.any():
                h = np.where(yref, (180.0 - h) % 360.0, h)
            if xref.any() or yref.any():
                self._heading[ids] = h
        self._x[ids] = nx
        self._y[ids] = ny

    # ------------------------------------------------------------------
    # patches
    # ------------------------------------------------------------------

    def patch_index(self, pxcor: int, pycor: int) -> tuple[int, int]:
        c = self.config
        if self.config.wrap:
            pxcor = (pxcor - c.min_pxcor) % c.width + c.min_pxcor
            pycor = (pycor - c.min_pycor) % c.height + c.min_pycor
        if not (c.min_pxcor <= pxcor <= c.max_pxcor and c.min_pycor <= pycor <= c.max_pycor):
            raise SimError(f"patch ({pxcor}, {pycor}) outside the world")
        return (pycor - c.min_pycor, pxcor - c.min_pxcor)

    def patch(self, pxcor: int, pycor: int) -> Patch:
        iy, ix = self.patch_index(pxcor, pycor)
        return Patch(pxcor, pycor, float(self.pcolor[iy, ix]))

    def set_pcolor(self, pxcor: int, pycor: int, value: float) -> None:
        iy, ix = self.patch_index(pxcor, pycor)
        self.pcolor[iy, ix] = colors.wrap(value)

    def set_all_pcolor(self, value: float) -> None:
        self.pcolor[:, :] = colors.wrap(value)

    # ------------------------------------------------------------------
    # links
    # ------------------------------------------------------------------

    def create_link(self, a: int, b: int, weight: float = 1.0) -> None:
        a, b = int(a), int(b)
        if a == b:
            raise SimError("a link needs two distinct endpoints")
        if not self.is_alive(a) or not self.is_alive(b):
            raise UnknownAgentError(f"link endpoints must be live agents: ({a}, {b})")
        if weight < 0:
            raise SimError("link weight must be >= 0")
        key = (min(a, b), max(a, b))
        if key in self._link_weight:
            raise SimError(f"link {key} already exists")
        self._adj.setdefault(a, set()).add(b)
        self._adj.setdefault(b, set()).add(a)
        self._link_weight[key] = float(weight)

    def _unlink(self, a: int, b: int) -> None:
        key = (min(a, b), max(a, b))
        self._link_weight.pop(key, None)
        self._adj.get(a, set()).discard(b)
        self._adj.get(b, set()).discard(a)

    def has_link(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self._link_weight

    def neighbors_of(self, aid: int) -> list[int]:
        if not self.is_alive(aid):
            raise UnknownAgentError(f"no live agent with id {aid}")
        return sorted(self._adj.get(int(aid), ()))

    def links(self) -> list[tuple[int, int, float]]:
        return [(a, b, w) for (a, b), w in sorted(self._link_weight.items())]

    # ------------------------------------------------------------------
    # run machinery
    # ------------------------------------------------------------------

    def rng_for(self, name: str):
        """Named RNG substream for the current tick; repeated requests under
        the same name at one tick advance a sequence counter."""
        key = (name, self.tick)
        seq = self._seq.get(key, 0)
        self._seq[key] = seq + 1
        return generator(substream_seed(self.config.seed, name, self.tick, seq))

    def add_behavior(self, name: str, fn) -> None:
        if any(n == name for n, _ in self.behaviors):
            raise SimError(f"behavior '{name}' already registered")
        self.behaviors.append((name, fn))

    def register_reporter(self, name: str, fn) -> None:
        if any(n == name for n, _ in self.reporters):
            raise SimError(f"reporter '{name}' already registered")
        self.reporters.append((name, fn))
        self.series[name] = [None] * len(self.series_ticks)

    def step(self) -> TickReport:
        """Run every behavior once (registration order), advance the tick,
        then sample every reporter."""
        timings: dict[str, float] = {}
        for name, fn in list(self.behaviors):
            rng = self.rng_for(name)
            t0 = time.perf_counter()
            try:
                fn(self, rng)
            except SimError:
                raise
            except Exception as exc:
                raise BehaviorError(name, self.tick, exc) from exc
            timings[name] = time.perf_counter() - t0
        self.tick += 1
        self._seq.clear()
        for name, fn in self.reporters:
            self.series[name].append(float(fn(self)))
        self.series_ticks.append(self.tick)
        return TickReport(self.tick, timings, dict(self.globals))

    def clear_all(self) -> None:
        """Reset to the post-create_world state: agents, links, globals,
        series, behaviors, and patch state removed; tick 0; RNG reseeded."""
        self._init_store()
        self._init_patches()
        self.globals.clear()
        self.behaviors.clear()
        self.reporters.clear()
        self.series.clear()
        self.series_ticks.clear()
        self._seq.clear()
        self.tick = 0

    # ------------------------------------------------------------------
    # digest
    # ------------------------------------------------------------------

    def digest(self) -> str:
        """SHA-256 over a canonical rendering of the observable state."""
        c = self.config
        parts = [f"config:{c.width},{c.height},{int(c.wrap)},{c.seed}", f"tick:{self.tick}"]
        var_names = sorted(self._vars)
        for aid in self.alive_ids():
            a = int(aid)
            row = [
                str(a),
                self._breed_names[self._breed[a]],
                _fmt(self._x[a]),
                _fmt(self._y[a]),
                _fmt(self._heading[a]),
                _fmt(self._color[a]),
                AGENT_STATES[self._astate[a]],
            ]
            row.extend(f"{v}={_fmt(self._vars[v][a])}" for v in var_names)
            parts.append("|".join(row))
        parts.append("pcolor:" + ",".join(_fmt(v) for v in self.pcolor.ravel()))
        for v in sorted(self.patch_vars):
            parts.append(f"pvar:{v}:" + ",".join(_fmt(x) for x in self.patch_vars[v].ravel()))
        parts.append("links:" + ";".join(f"{a},{b},{_fmt(w)}" for a, b, w in self.links()))
        parts.append("globals:" + ";".join(f"{k}={_fmt(v)}" for k, v in sorted(self.globals.items())))
        return hashlib.sha256("\n".join(parts).encode()).hexdigest()


def create_world(config: WorldConfig) -> SimState:
    """A fresh world: all patches black, no agents, no links, tick 0."""
    return SimState(config)
