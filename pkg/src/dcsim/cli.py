"""Command-line front end: the sweep / run / post workflow.

``sweep`` expands a base properties file against a parameter grid into one
config file per run, ``run`` executes configs (optionally a directory of
them in parallel), and ``post`` merges the run CSVs and writes the
summary statistics consumed by the plotting scripts.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import engine, stats
from .config import ConfigError, generate_sweep, parse_config, render_config


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def cmd_sweep(args: argparse.Namespace) -> int:
    base_path = Path(args.base)
    try:
        base = parse_config(base_path.read_text(encoding="utf-8"))
    except OSError as exc:
        return _fail(f"cannot read base config: {exc}")
    except ConfigError as exc:
        return _fail(str(exc))

    grid: dict[str, list[str]] = {}
    for spec in args.grid or []:
        if "=" not in spec:
            return _fail(f"grid spec {spec!r} is not key=v1,v2,...")
        key, _, values = spec.partition("=")
        grid[key] = [v for v in values.split(",") if v]

    out_dir = Path(args.out)
    if out_dir.exists() and any(out_dir.iterdir()) and not args.force:
        return _fail(f"output directory {out_dir} is not empty (use --force to write anyway)")
    out_dir.mkdir(parents=True, exist_ok=True)

    try:
        runs = generate_sweep(base, grid, args.replicates)
    except ConfigError as exc:
        return _fail(str(exc))
    for config, name in runs:
        (out_dir / name).write_text(render_config(config), encoding="utf-8")
    print(f"wrote {len(runs)} config files to {out_dir}")
    return 0


def run_one(config_path: Path) -> tuple[str, float, int, float]:
    """Execute one config file; returns (csv path, wall s, peak queue, far fraction)."""
    config = parse_config(config_path.read_text(encoding="utf-8"))
    output = Path(config.output_path)
    if not output.is_absolute():
        output = config_path.parent / output
    started = time.perf_counter()
    world = engine.initialize(config)
    with stats.CsvWriter(output) as writer:
        engine.run(world, sink=writer.write)
    wall = time.perf_counter() - started
    qstats = world.queue.stats
    return str(output), wall, qstats.peak_size, qstats.far_fraction


def _run_one_entry(path_str: str) -> tuple[str, float, int, float]:
    return run_one(Path(path_str))


def cmd_run(args: argparse.Namespace) -> int:
    if bool(args.config) == bool(args.dir):
        return _fail("give exactly one of a config file or --dir")
    if args.config:
        paths = [Path(args.config)]
    else:
        paths = sorted(Path(args.dir).glob("*.properties"))
        if not paths:
            return _fail(f"no .properties files in {args.dir}")
    for path in paths:
        if not path.is_file():
            return _fail(f"config file missing: {path}")

    try:
        if args.jobs > 1 and len(paths) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(_run_one_entry, [str(p) for p in paths]))
        else:
            results = [run_one(path) for path in paths]
    except (ConfigError, OSError) as exc:
        return _fail(str(exc))
    for path, (output, wall, peak, far_fraction) in zip(paths, results):
        print(f"{path.name}: wrote {output} in {wall:.2f}s "
              f"(peak queue {peak}, far-list insert fraction {far_fraction:.3f})")
    return 0


def cmd_post(args: argparse.Namespace) -> int:
    run_dir = Path(args.dir)
    paths = sorted(run_dir.glob("*.csv"))
    if not paths:
        return _fail(f"no run CSV files in {run_dir}")
    try:
        merged = stats.merge_runs(paths)
        summaries = stats.summarize_all(merged)
    except (stats.SchemaError, FileNotFoundError, ValueError) as exc:
        return _fail(str(exc))
    rows = stats.write_summary_csv(summaries, args.out)
    print(f"wrote {rows} summary rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcsim",
        description="Simulate policy-distribution consistency in a hierarchical data centre.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="expand a base config against a parameter grid")
    p_sweep.add_argument("--base", required=True, help="base properties file")
    p_sweep.add_argument("--grid", action="append", metavar="KEY=V1,V2,...",
                         help="values to sweep for one config key (repeatable)")
    p_sweep.add_argument("--replicates", type=int, default=1)
    p_sweep.add_argument("--out", required=True, help="directory for generated configs")
    p_sweep.add_argument("--force", action="store_true",
                         help="write into a non-empty output directory")
    p_sweep.set_defaults(func=cmd_sweep)

    p_run = sub.add_parser("run", help="run one config file or a directory of them")
    p_run.add_argument("config", nargs="?", help="properties file for a single run")
    p_run.add_argument("--dir", help="directory of properties files")
    p_run.add_argument("--jobs", type=int, default=1, help="concurrent runs for --dir")
    p_run.set_defaults(func=cmd_run)

    p_post = sub.add_parser("post", help="merge run CSVs and compute summary statistics")
    p_post.add_argument("--dir", required=True, help="directory of run CSV files")
    p_post.add_argument("--out", required=True, help="summary CSV to write")
    p_post.set_defaults(func=cmd_post)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
