"""Command line entry point: ``augexplore {validate,train,eval,sweep,report,probe,presets}``.

Exit status is 0 on success, 2 for configuration or usage errors and 1 for
failures while running.
"""
from __future__ import annotations

import argparse
import itertools
import json
import logging
import re
import sys
from pathlib import Path

from ..augment import ConfigError
from ..envs import EnvSpec, load_maze, maze_from_ascii
from ..nn import load_tensors
from .config import config_from_dict, load_config, load_preset, preset_names, with_overrides
from .probe import goal_directing_probe
from .report import format_report, report_rows
from .runner import build_agent, evaluate, load_agent_tensors, run_experiment

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


def _config_dict(ref: str) -> dict:
    """``preset:<name>`` or a path to a JSON file."""
    if ref.startswith("preset:"):
        name = ref.split(":", 1)[1]
        if name not in preset_names():
            raise ConfigError(f"unknown preset {name!r}; choose from {preset_names()}")
        return load_preset(name)
    try:
        return json.loads(Path(ref).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {ref}: {exc}") from exc


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _load(args) -> "ExperimentConfig":  # noqa: F821
    data = _config_dict(args.config)
    overrides = {}
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key] = _parse_value(value)
    return config_from_dict(with_overrides(data, overrides))


def _parse_cell(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"\s*(\d+)\s*,\s*(\d+)\s*", text)
    if not m:
        raise ConfigError(f"cell must look like 'row,col', got {text!r}")
    return int(m.group(1)), int(m.group(2))


def _maze(ref: str, max_steps: int | None) -> EnvSpec:
    path = Path(ref)
    if path.exists():
        return maze_from_ascii(path.read_text(), max_steps=max_steps or 100, name=path.stem)
    try:
        return load_maze(ref, max_steps)
    except (KeyError, FileNotFoundError, ValueError) as exc:
        raise ConfigError(f"unknown maze {ref!r}") from exc


def cmd_validate(args) -> int:
    cfg = _load(args)
    env, bonus, aug = cfg.label()
    print(f"ok: {cfg.name} env={env} bonus={bonus} augmentation={aug} agent={cfg.agent.algo}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _load(args)
    out = args.output_dir or str(Path(cfg.output_dir) / cfg.name)
    result = run_experiment(cfg, out, args.seeds)
    for s in result.summaries():
        print(json.dumps(s))
    print(f"artifacts written to {out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = _load(args)
    agent = build_agent(cfg, 0)
    load_agent_tensors(agent, load_tensors(args.checkpoint))
    engine_state = json.loads(Path(args.engine).read_text()) if args.engine else None
    res = evaluate(agent, cfg, args.episodes, engine_state)
    print(json.dumps({"episodes": args.episodes, "mean_return": res.mean_return,
                      "mean_episode_coverage": res.mean_coverage}))
    return EXIT_OK


def grid_points(grid: dict) -> list[dict]:
    if not isinstance(grid, dict) or not all(isinstance(v, list) and v for v in grid.values()):
        raise ConfigError("a sweep grid maps dotted keys to nonempty lists")
    keys = sorted(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def _point_name(point: dict) -> str:
    parts = [f"{k}={json.dumps(v, separators=(',', ':'))}" for k, v in point.items()]
    return re.sub(r"[^A-Za-z0-9_.=,-]+", "", "_".join(parts)) or "default"


def cmd_sweep(args) -> int:
    base = _config_dict(args.config)
    try:
        text = args.grid if args.grid.lstrip().startswith("{") else Path(args.grid).read_text()
        grid = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read grid {args.grid}: {exc}") from exc
    points = grid_points(grid)
    configs = [(p, config_from_dict(with_overrides(base, p))) for p in points]  # validate all first
    root = Path(args.output_dir or Path(configs[0][1].output_dir) / configs[0][1].name)
    for point, cfg in configs:
        out = root / _point_name(point)
        run_experiment(cfg, out)
        print(f"finished {out}")
    return EXIT_OK


def cmd_report(args) -> int:
    if not Path(args.directory).is_dir():
        raise ConfigError(f"{args.directory} is not a directory")
    rows = report_rows(args.directory)
    if not rows:
        raise RuntimeError(f"no completed runs under {args.directory}")
    text = format_report(rows)
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def _probe_config(args) -> "ExperimentConfig":  # noqa: F821
    """``--config`` if given, else the ``config.json`` of the run that wrote the checkpoint."""
    if args.config is None:
        found = Path(args.checkpoint).resolve().parent.parent / "config.json"
        if not found.exists():
            raise ConfigError(f"no config.json next to {args.checkpoint}; pass --config")
        args.config = str(found)
    return _load(args)


def cmd_probe(args) -> int:
    cfg = _probe_config(args)
    spec = _maze(args.maze, args.max_steps)
    agent = build_agent(cfg, 0)
    load_agent_tensors(agent, load_tensors(args.checkpoint))
    report = goal_directing_probe(agent, spec, _parse_cell(args.cell), cfg.active_encoding,
                                  cfg.bonus, args.max_steps)
    print(json.dumps({"cell": list(report.goal_cell), "reached": report.reached,
                      "steps": report.steps_to_goal,
                      "trajectory": [list(c) for c in report.trajectory]}))
    return EXIT_OK


def cmd_presets(args) -> int:
    for name in preset_names():
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="augexplore", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp):
        sp.add_argument("config", help="JSON config path or preset:<name>")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a dotted config key (value parsed as JSON)")
        return sp

    with_config(sub.add_parser("validate", help="check a config")).set_defaults(func=cmd_validate)

    sp = with_config(sub.add_parser("train", help="train all seeds of a config"))
    sp.add_argument("--output-dir")
    sp.add_argument("--seeds", type=int, nargs="+")
    sp.set_defaults(func=cmd_train)

    sp = with_config(sub.add_parser("eval", help="greedy evaluation of a checkpoint"))
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--engine", help="engine.json snapshot for global-scope statistics")
    sp.add_argument("--episodes", type=int, default=10)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("sweep", help="train every point of a parameter grid")
    sp.add_argument("config")
    sp.add_argument("--grid", required=True, help='JSON object {"dotted.key": [values]}, inline or as a file path')
    sp.add_argument("--output-dir")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("report", help="IQM table over run directories")
    sp.add_argument("directory")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("probe", help="goal-directing probe of a checkpoint")
    sp.add_argument("checkpoint")
    sp.add_argument("maze", help="bundled maze name or ASCII maze file")
    sp.add_argument("cell", help="row,col of the cell left unvisited")
    sp.add_argument("--config", help="config of the run (default: config.json two levels up)")
    sp.add_argument("--set", action="append", metavar="KEY=VALUE")
    sp.add_argument("--max-steps", type=int)
    sp.set_defaults(func=cmd_probe)

    sub.add_parser("presets", help="list shipped presets").set_defaults(func=cmd_presets)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - report any runtime failure as exit 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
