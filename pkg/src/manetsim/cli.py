"""Command-line entry point: `manet-sim run` and `manet-sim sweep`."""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, ScenarioConfig, load_scenario
from .scenario import Grid, csv_text, gnuplot_text, run_scenario, sweep


def _split(text, cast=str):
    return tuple(cast(x) for x in text.replace(",", " ").split())


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="manet-sim",
                                     description="MANET routing and propagation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and print its CSV row")
    run.add_argument("--config", help="scenario file (key = value lines)")
    run.add_argument("--out", help="CSV output file (default stdout)")
    run.add_argument("--trace", help="write the mobility and packet trace here")
    run.add_argument("--protocol")
    run.add_argument("--model", dest="propagation")
    run.add_argument("--connections", type=int)
    run.add_argument("--seed", type=int)

    sw = sub.add_parser("sweep", help="run protocol x model x connections x seeds")
    sw.add_argument("--config", help="base scenario file")
    sw.add_argument("--protocols", help="e.g. aodv,dsr,dsdv")
    sw.add_argument("--models", help="e.g. freespace,tworay,rice")
    sw.add_argument("--connections", help="e.g. 5,10,15")
    sw.add_argument("--seeds", help="e.g. 1,2,3")
    sw.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    sw.add_argument("--out", help="CSV output file (default stdout)")
    sw.add_argument("--gnuplot", help="block data file (default: OUT with .dat suffix)")
    return parser


def _base(path) -> ScenarioConfig:
    return load_scenario(path) if path else ScenarioConfig()


def cmd_run(args) -> int:
    cfg = _base(args.config)
    overrides = {k: v for k, v in (("protocol", args.protocol),
                                   ("propagation", args.propagation),
                                   ("connections", args.connections),
                                   ("seed", args.seed)) if v is not None}
    if overrides:
        cfg = cfg.replace(**overrides)
    result = run_scenario(cfg, trace=args.trace is not None)
    _write(args.out, csv_text([result.row]))
    if args.trace:
        _write(args.trace, result.network.trace_text())
    return 0


def cmd_sweep(args) -> int:
    cfg = _base(args.config)
    grid = Grid(
        protocols=_split(args.protocols) if args.protocols else (cfg.protocol,),
        models=_split(args.models) if args.models else (cfg.propagation,),
        connections=_split(args.connections, int) if args.connections else (cfg.connections,),
        seeds=_split(args.seeds, int) if args.seeds else (cfg.seed,),
    )
    rows, errors = sweep(cfg, grid, jobs=args.jobs)
    _write(args.out, csv_text(rows))
    dat = args.gnuplot
    if dat is None and args.out and args.out != "-":
        stem = args.out[:-4] if args.out.endswith(".csv") else args.out
        dat = stem + ".dat"
    if dat:
        _write(dat, gnuplot_text(rows))
    cells = grid.cells()
    for i, msg in sorted(errors.items()):
        print(f"manet-sim: cell {cells[i]} failed: {msg}", file=sys.stderr)
    return 0 if not errors else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        return cmd_sweep(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"manet-sim: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
