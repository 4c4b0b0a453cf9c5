"""Command line entry points: run, sweep, repl, serve, replay."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .console import ConsoleError, Session
from .metrics import export_csv
from .models import MODEL_NAMES, make_model
from .sweep import SweepSpec, execute_run, run_experiment, write_runs_csv
from .world import ConfigError, SimError, WorldConfig, create_world


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def world_config_from(data: dict, seed=None, max_ticks=None) -> WorldConfig:
    w = data.get("world", {})
    return WorldConfig(
        width=int(w.get("width", 33)),
        height=int(w.get("height", 33)),
        wrap=bool(w.get("wrap", True)),
        seed=int(seed if seed is not None else w.get("seed", 42)),
        max_ticks=max_ticks,
    )


def _parse_param_overrides(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"--param expects name=value, got {pair!r}")
        name, raw = pair.split("=", 1)
        try:
            out[name] = json.loads(raw)
        except json.JSONDecodeError:
            out[name] = raw
    return out


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    model_name = args.model or cfg.get("model")
    if not model_name:
        raise ConfigError("no model given (use --model or the config file)")
    params = dict(cfg.get("params", {}))
    params.update(_parse_param_overrides(args.param))
    world = cfg.get("world", {})
    seed = args.seed if args.seed is not None else world.get("seed", 42)
    state, metrics, ticks = execute_run(model_name, world, params, seed, args.ticks)
    if args.out:
        export_csv(state, args.out)
    summary = " ".join(f"{k}={v:g}" for k, v in metrics.items())
    print(f"model={model_name} seed={seed} ticks={ticks} {summary}")
    return 0


def cmd_sweep(args) -> int:
    spec = SweepSpec.from_json(args.spec)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    series_dir = out_dir / "series" if spec.save_series else None
    records = run_experiment(spec, parallelism=args.parallelism, series_dir=series_dir)
    write_runs_csv(records, out_dir / "runs.csv")
    failed = sum(1 for r in records if r.failed)
    print(f"{len(records)} runs -> {out_dir / 'runs.csv'} ({failed} failed)")
    return 0


def cmd_repl(args) -> int:
    cfg = load_config(args.config)
    model_name = args.model or cfg.get("model")
    state = create_world(world_config_from(cfg, seed=args.seed))
    model = None
    if model_name:
        model = make_model(model_name, cfg.get("params", {}))
        model.setup(state)
    session = Session(state)
    print(f"sosim repl (model: {model_name or 'none'}); 'exit' quits, "
          f"'step [n]' advances, 'setup' rebuilds")
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        if line == "exit":
            break
        if line == "setup":
            state.clear_all()
            if model is not None:
                model.setup(state)
            print(f"tick {state.tick}")
            continue
        if line == "step" or line.startswith("step "):
            try:
                n = int(line.split()[1]) if " " in line else 1
            except ValueError:
                print("error: step expects an integer")
                continue
            for _ in range(n):
                state.step()
            print(f"tick {state.tick}")
            continue
        try:
            for value in session.run(line):
                from .console.interp import format_value
                print(format_value(value))
        except ConsoleError as err:
            print(f"error at line {err.line}, col {err.col}: {err.message}")
        except SimError as err:
            print(f"error: {err}")
    return 0


def cmd_serve(args) -> int:
    from .server import SimService

    cfg = load_config(args.config)
    model_name = args.model or cfg.get("model")
    if not model_name:
        raise ConfigError("no model given (use --model or the config file)")
    params = dict(cfg.get("params", {}))
    params.update(_parse_param_overrides(args.param))
    service = SimService(
        model_name,
        world=cfg.get("world", {}),
        params=params,
        seed=args.seed if args.seed is not None else cfg.get("world", {}).get("seed", 42),
        frame_rate=args.frame_rate,
        tick_rate=args.tick_rate,
        log_path=args.log,
        metrics_out=args.metrics_out,
        ui_dir=args.ui_dir,
    )
    port = service.start(args.host, args.port)
    print(f"listening on {args.host}:{port}", flush=True)
    try:
        service.join()
    except KeyboardInterrupt:
        service.shutdown()
    return 0


def cmd_replay(args) -> int:
    from .server import replay_log

    state = replay_log(args.log, config_path=args.config)
    if args.out:
        export_csv(state, args.out)
    print(f"replayed to tick {state.tick}; digest {state.digest()[:16]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sosim",
                                 description="self-organizing network simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="headless run, metrics to CSV")
    run.add_argument("--model", choices=MODEL_NAMES)
    run.add_argument("--config")
    run.add_argument("--ticks", type=int, default=500)
    run.add_argument("--seed", type=int)
    run.add_argument("--out")
    run.add_argument("--param", action="append", metavar="NAME=VALUE")
    run.set_defaults(fn=cmd_run)

    sweep = sub.add_parser("sweep", help="parameter sweep from a spec file")
    sweep.add_argument("--spec", required=True)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--parallelism", type=int, default=1)
    sweep.set_defaults(fn=cmd_sweep)

    repl = sub.add_parser("repl", help="interactive console on stdin")
    repl.add_argument("--model", choices=MODEL_NAMES)
    repl.add_argument("--config")
    repl.add_argument("--seed", type=int)
    repl.set_defaults(fn=cmd_repl)

    serve = sub.add_parser("serve", help="live-steering service")
    serve.add_argument("--model", choices=MODEL_NAMES)
    serve.add_argument("--config")
    serve.add_argument("--seed", type=int)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8714)
    serve.add_argument("--frame-rate", type=float, default=20.0)
    serve.add_argument("--tick-rate", type=float, default=0.0,
                       help="ticks per second during go; 0 = unthrottled")
    serve.add_argument("--log", help="command log (JSON lines) for replay")
    serve.add_argument("--metrics-out", help="metrics CSV written on stop/shutdown")
    serve.add_argument("--ui-dir", help="serve this directory over HTTP")
    serve.add_argument("--param", action="append", metavar="NAME=VALUE")
    serve.set_defaults(fn=cmd_serve)

    replay = sub.add_parser("replay", help="re-run a recorded session headlessly")
    replay.add_argument("--log", required=True)
    replay.add_argument("--config")
    replay.add_argument("--out")
    replay.set_defaults(fn=cmd_replay)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (SimError, ConsoleError, OSError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
