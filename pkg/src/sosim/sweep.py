"""Parameter-sweep harness: grid expansion, derived seeds, run records.

Run seeds derive as ``mix64(base_seed XOR (run_index+1)*0x9E3779B97F4A7C15)``
so any implementation of the mixer reproduces the records.  Runs are
independent by construction; executing them in any order or in parallel
yields identical records (modulo wall_time).
"""

from __future__ import annotations

import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .metrics import export_csv, fmt_real
from .rng import derive_run_seed
from .world import ConfigError, SimError, WorldConfig, create_world


@dataclass(frozen=True)
class SweepSpec:
    model: str
    grid: dict[str, list]
    repetitions: int = 1
    base_seed: int = 0
    world: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)  # fixed params under the grid
    max_ticks: int = 1000
    stop: dict | None = None  # {"reporter": name, "op": "<=", "value": v}
    save_series: bool = False

    def __post_init__(self):
        if not self.grid:
            raise ConfigError("sweep grid must be nonempty")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if any(not values for values in self.grid.values()):
            raise ConfigError("every grid axis needs at least one value")

    @classmethod
    def from_json(cls, path) -> "SweepSpec":
        data = json.loads(Path(path).read_text())
        return cls(
            model=data["model"],
            grid=data["grid"],
            repetitions=int(data.get("repetitions", 1)),
            base_seed=int(data.get("base_seed", 0)),
            world=data.get("world", {}),
            params=data.get("params", {}),
            max_ticks=int(data.get("max_ticks", 1000)),
            stop=data.get("stop"),
            save_series=bool(data.get("save_series", False)),
        )


@dataclass
class RunRecord:
    run_index: int
    seed: int
    params: dict
    metrics: dict
    ticks: int
    wall_time: float
    failed: bool = False
    error: str = ""


def expand_grid(grid: dict[str, list]) -> list[dict]:
    """Cartesian product in key insertion order, last key fastest."""
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


_OPS = {
    "==": lambda a, b: a == b,
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
}


def _stop_hit(state, stop: dict | None) -> bool:
    if not stop:
        return False
    name = stop["reporter"]
    series = state.series.get(name)
    if not series:
        return False
    return _OPS[stop.get("op", "<=")](series[-1], stop["value"])


def execute_run(model_name: str, world: dict, params: dict, seed: int,
                max_ticks: int, stop: dict | None = None):
    """One headless run; returns (state, metrics, ticks elapsed)."""
    from .models import make_model

    cfg = WorldConfig(
        width=int(world.get("width", 33)),
        height=int(world.get("height", 33)),
        wrap=bool(world.get("wrap", True)),
        seed=int(seed),
        max_ticks=max_ticks,
    )
    state = create_world(cfg)
    model = make_model(model_name, params)
    model.setup(state)
    while state.tick < max_ticks and not model.done(state) and not _stop_hit(state, stop):
        state.step()
    metrics = {name: float(fn(state)) for name, fn in state.reporters}
    return state, metrics, state.tick


def _run_entry(args) -> RunRecord:
    run_index, model_name, world, params, base_seed, max_ticks, stop, series_dir = args
    seed = derive_run_seed(base_seed, run_index)
    t0 = time.perf_counter()
    try:
        state, metrics, ticks = execute_run(model_name, world, params, seed, max_ticks, stop)
        if series_dir is not None:
            export_csv(state, Path(series_dir) / f"run_{run_index}.csv")
        return RunRecord(run_index, seed, dict(params), metrics, ticks,
                         time.perf_counter() - t0)
    except Exception as exc:  # a failed run must not abort the sweep
        return RunRecord(run_index, seed, dict(params), {}, 0,
                         time.perf_counter() - t0, failed=True, error=str(exc))


def run_experiment(spec: SweepSpec, parallelism: int = 1,
                   series_dir=None) -> list[RunRecord]:
    """Execute every grid point x repetition; records ordered by run_index."""
    points = expand_grid(spec.grid)
    jobs = []
    run_index = 0
    for point in points:
        for _ in range(spec.repetitions):
            params = dict(spec.params)
            params.update(point)
            jobs.append((run_index, spec.model, dict(spec.world), params,
                         spec.base_seed, spec.max_ticks, spec.stop, series_dir))
            run_index += 1
    if series_dir is not None:
        Path(series_dir).mkdir(parents=True, exist_ok=True)
    if parallelism <= 1:
        return [_run_entry(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        records = list(pool.map(_run_entry, jobs))
    return sorted(records, key=lambda r: r.run_index)


def write_runs_csv(records: list[RunRecord], destination) -> None:
    """One row per run; wall_time last so diffs ignore it cleanly."""
    if not records:
        raise SimError("no records to write")
    param_names = sorted({k for r in records for k in r.params})
    metric_names = sorted({k for r in records for k in r.metrics})
    header = (["run_index", "seed"] + param_names + ["ticks"]
              + metric_names + ["failed", "error", "wall_time"])
    lines = [",".join(header)]
    for r in sorted(records, key=lambda r: r.run_index):
        row = [str(r.run_index), str(r.seed)]
        row += [_cell(r.params.get(k)) for k in param_names]
        row.append(str(r.ticks))
        row += [_cell(r.metrics.get(k)) for k in metric_names]
        row += [str(int(r.failed)), r.error.replace(",", ";"), fmt_real(r.wall_time)]
        lines.append(",".join(row))
    Path(destination).write_text("\n".join(lines) + "\n")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (int,)):
        return str(v)
    if isinstance(v, float):
        return fmt_real(v)
    return str(v)


def summarize(records: list[RunRecord], group_by: list[str]) -> list[dict]:
    """Mean/std/min/max of every metric per parameter group.

    std uses the n-1 denominator and is reported as 0.0 for singleton groups
    (the ``n`` column flags those); failed runs are excluded.
    """
    ok = [r for r in records if not r.failed]
    if not ok:
        raise SimError("summarize needs at least one successful record")
    metric_names = sorted({k for r in ok for k in r.metrics} | {"ticks"})
    groups: dict[tuple, list[RunRecord]] = {}
    for r in ok:
        key = tuple(r.params.get(k) for k in group_by)
        groups.setdefault(key, []).append(r)
    rows = []
    for key in sorted(groups, key=lambda k: tuple(str(x) for x in k)):
        members = groups[key]
        row: dict = dict(zip(group_by, key))
        row["n"] = len(members)
        for m in metric_names:
            vals = [float(r.ticks) if m == "ticks" else r.metrics[m]
                    for r in members if m == "ticks" or m in r.metrics]
            if not vals:
                continue
            n = len(vals)
            mean = sum(vals) / n
            if n > 1:
                std = math.sqrt(sum((v - mean) ** 2 for v in vals) / (n - 1))
            else:
                std = 0.0
            row[f"{m}_mean"] = mean
            row[f"{m}_std"] = std
            row[f"{m}_min"] = min(vals)
            row[f"{m}_max"] = max(vals)
        rows.append(row)
    return rows
