"""Command line front end.

Verbs:
  run      simulate one scenario; writes report.json, rounds.csv,
           accuracy.csv, and figures into --out-dir
  sweep    run a constellation-size grid; writes sweep.csv and a heatmap
  heatmap  rebuild a heatmap table (and figure) from an existing sweep.csv
  windows  compute contact windows to CSV (and a timeline figure)

Every verb exits 0 on success and 2 on a configuration or input error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .config import load_scenario, load_sweep
from .contacts import windows_to_csv
from .engine import run_scenario, scenario_windows
from .sweep import HEATMAP_METRICS, read_sweep_csv, run_sweep, write_heatmap_csv, write_sweep_csv

_WINDOW_KINDS = ("sat-gs", "intra-sl", "inter-sl")


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = load_scenario(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.horizon_s is not None:
        overrides["horizon_s"] = args.horizon_s
    if args.max_rounds is not None:
        overrides["max_rounds"] = args.max_rounds
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    out = _out_dir(args.out_dir)

    report = run_scenario(cfg)
    report.write_json(out / "report.json")
    report.write_rounds_csv(out / "rounds.csv")
    report.write_accuracy_csv(out / "accuracy.csv")
    if not args.no_figures:
        from . import plots

        plots.plot_accuracy([report], out / "accuracy.png")
        plots.plot_round_durations(report, out / "rounds.png")
        plots.plot_phase_breakdown(report, out / "phases.png")
    if report.insufficient_clients:
        print(f"insufficient clients: {report.strategy} needs at least 2 satellites")
    else:
        print(
            f"{report.strategy}: {report.rounds_completed} rounds, "
            f"final accuracy {report.final_accuracy:.4f}, "
            f"span {report.total_span_s / 3600.0:.2f} h"
        )
    print(f"wrote {out}/report.json")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = load_sweep(args.config)
    if args.trials is not None:
        cfg = dataclasses.replace(cfg, trials=args.trials)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, base=dataclasses.replace(cfg.base, seed=args.seed))
    out = _out_dir(args.out_dir)

    result = run_sweep(cfg, parallelism=args.parallelism)
    write_sweep_csv(result, out / "sweep.csv")
    write_heatmap_csv(result, args.metric, out / "heatmap.csv")
    if not args.no_figures:
        from . import plots

        plots.plot_heatmap(result, args.metric, out / "heatmap.png")
    ok = sum(1 for r in result.rows if r.status == "ok")
    print(f"{len(result.rows)} cells, {ok} ok; wrote {out}/sweep.csv")
    return 0


def _cmd_heatmap(args: argparse.Namespace) -> int:
    result = read_sweep_csv(args.sweep_csv)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_heatmap_csv(result, args.metric, out, ground_stations=args.ground_stations)
    if not args.no_figures:
        from . import plots

        plots.plot_heatmap(result, args.metric, out.with_suffix(".png"), ground_stations=args.ground_stations)
    print(f"wrote {out}")
    return 0


def _cmd_windows(args: argparse.Namespace) -> int:
    cfg = load_scenario(args.config)
    kinds = tuple(k.strip() for k in args.kinds.split(","))
    for kind in kinds:
        if kind not in _WINDOW_KINDS:
            raise ValueError(f"unknown window kind {kind!r} (allowed: {list(_WINDOW_KINDS)})")
    until = args.until_s if args.until_s is not None else min(cfg.horizon_s, 86400.0)
    windows = scenario_windows(cfg, until, kinds)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    windows_to_csv(windows, out)
    if not args.no_figures:
        from . import plots

        plots.plot_windows_timeline(windows, out.with_suffix(".png"))
    print(f"{len(windows)} windows; wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orbitfl", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="simulate one scenario")
    run_p.add_argument("--config", required=True, help="scenario YAML")
    run_p.add_argument("--out-dir", required=True, help="output directory")
    run_p.add_argument("--seed", type=int, default=None, help="override scenario seed")
    run_p.add_argument("--horizon-s", type=float, default=None, help="override horizon")
    run_p.add_argument("--max-rounds", type=int, default=None, help="override round cap")
    run_p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    run_p.set_defaults(func=_cmd_run)

    sweep_p = sub.add_parser("sweep", help="run a constellation-size grid")
    sweep_p.add_argument("--config", required=True, help="sweep YAML")
    sweep_p.add_argument("--out-dir", required=True, help="output directory")
    sweep_p.add_argument("--trials", type=int, default=None, help="override trial count")
    sweep_p.add_argument("--seed", type=int, default=None, help="override base seed")
    sweep_p.add_argument("--parallelism", type=int, default=1, help="worker processes")
    sweep_p.add_argument("--metric", default="final_accuracy", choices=HEATMAP_METRICS)
    sweep_p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    sweep_p.set_defaults(func=_cmd_sweep)

    heat_p = sub.add_parser("heatmap", help="heatmap table from an existing sweep.csv")
    heat_p.add_argument("--sweep-csv", required=True, help="sweep.csv from a previous sweep")
    heat_p.add_argument("--metric", default="final_accuracy", choices=HEATMAP_METRICS)
    heat_p.add_argument("--out", required=True, help="output CSV path")
    heat_p.add_argument("--ground-stations", type=int, default=None, help="ground station slice")
    heat_p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    heat_p.set_defaults(func=_cmd_heatmap)

    win_p = sub.add_parser("windows", help="contact windows to CSV")
    win_p.add_argument("--config", required=True, help="scenario YAML")
    win_p.add_argument("--out", required=True, help="output CSV path")
    win_p.add_argument("--until-s", type=float, default=None, help="end of the scan (default 1 day)")
    win_p.add_argument("--kinds", default="sat-gs", help="comma list: sat-gs,intra-sl,inter-sl")
    win_p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    win_p.set_defaults(func=_cmd_windows)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
