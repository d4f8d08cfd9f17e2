"""``lavanet`` command line: run, info, raster.

stdout carries ``key: value`` lines only; diagnostics go to stderr.
Exit codes: 0 success, 1 invalid input (bad flags, config, parameters),
2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import params as P
from .errors import LavanetError, PerCoreOutOfRange, UnknownParameter, ValidationError
from .partition import compute_layout, describe

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_INVALID)


def _err(msg):
    print(msg, file=sys.stderr)


def cmd_run(args):
    from .experiment import Experiment

    overrides = {}
    if args.config is not None:
        try:
            overrides = P.load_overrides(args.config)
        except FileNotFoundError:
            _err(f"config file not found: {args.config}")
            return EXIT_INVALID
        except (json.JSONDecodeError, ValueError) as exc:
            _err(f"{args.config}: invalid config: {exc}")
            return EXIT_INVALID
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["outputDirectory"] = args.out
    if args.threads is not None:
        overrides["hostThreads"] = args.threads
    if args.plot:
        overrides["plotRaster"] = True
    try:
        exp = Experiment(args.name, overrides)
    except UnknownParameter as exc:
        _err(f"config error: {exc}")
        return EXIT_INVALID
    except ValidationError as exc:
        _err("invalid parameters:")
        for v in exc.violations:
            _err(f"  - {v}")
        return EXIT_INVALID

    t0 = time.perf_counter()
    try:
        exp.build()
        exp.run()
    except LavanetError as exc:
        _err(f"{getattr(exc, 'phase', 'run')} failed: {type(exc).__name__}: {exc}")
        print(f"run_dir: {exp.run_dir}")
        return EXIT_RUNTIME
    elapsed = time.perf_counter() - t0

    print(f"run_dir: {exp.run_dir}")
    print(f"neurons: {exp.derived.reservoirSize}")
    print(f"cores: {exp.derived.coreCount}")
    print(f"chunks: {exp.derived.chunkCount}")
    print(f"steps: {exp.derived.totalSteps}")
    for pool, n in exp.spike_counts().items():
        print(f"spikes_{pool}: {n}")
    print(f"runtime_s: {elapsed:.3f}")
    return EXIT_OK


def cmd_info(args):
    try:
        layout = compute_layout(args.neurons, args.per_core)
    except PerCoreOutOfRange:
        _err(f"--per-core {args.per_core} exceeds {P.MAX_NEURONS_PER_CORE} compartments per core"
             if args.per_core > P.MAX_NEURONS_PER_CORE else f"--per-core must be >= 1, got {args.per_core}")
        return EXIT_INVALID
    except LavanetError as exc:
        _err(str(exc))
        return EXIT_INVALID
    for line in describe(layout):
        print(line)
    return EXIT_OK


def cmd_raster(args):
    from .raster import raster_from_run

    pools = None if args.pools is None else [s.strip() for s in args.pools.split(",") if s.strip()]
    try:
        svg = raster_from_run(args.run, pools)
    except FileNotFoundError as exc:
        _err(f"missing run data: {exc}")
        return EXIT_RUNTIME
    except (ValueError, KeyError) as exc:
        _err(f"cannot plot {args.run}: {exc}")
        return EXIT_INVALID
    out = Path(args.out) if args.out else Path(args.run) / "raster.svg"
    out.write_text(svg)
    print(f"svg: {out}")
    print(f"spikes: {_count_spikes(svg)}")
    return EXIT_OK


def _count_spikes(svg):
    return svg.count('<rect class="spike ')


def build_parser():
    parser = _Parser(prog="lavanet", description="Reservoir experiments on a simulated multi-core chip")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run an experiment from a parameter-override JSON file")
    run.add_argument("--config", help="JSON object of parameter overrides")
    run.add_argument("--seed", type=int, help="override the seed")
    run.add_argument("--out", help="parent directory for the run directory")
    run.add_argument("--name", default="experiment", help="suffix of the run directory")
    run.add_argument("--threads", type=int, help="host threads stepping cores")
    run.add_argument("--plot", action="store_true", help="also write raster.svg")
    run.set_defaults(func=cmd_run)

    info = sub.add_parser("info", help="show how a network is partitioned onto cores")
    info.add_argument("--neurons", type=int, required=True)
    info.add_argument("--per-core", type=int, required=True)
    info.set_defaults(func=cmd_info)

    raster = sub.add_parser("raster", help="render a run's spikes as SVG")
    raster.add_argument("--run", required=True, help="run directory")
    raster.add_argument("--out", help="output .svg (default <run>/raster.svg)")
    raster.add_argument("--pools", help="comma-separated subset of ex,in,out")
    raster.set_defaults(func=cmd_raster)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LavanetError as exc:
        _err(f"error: {exc}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
