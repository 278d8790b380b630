"""Constellation-size sweeps and heatmap tables."""

from __future__ import annotations

import csv
import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .config import ConstellationConfig, GroundSegmentConfig, ScenarioConfig, SweepConfig
from .engine import run_scenario

SCHEMA_VERSION = 1

SWEEP_COLUMNS = (
    "schema_version",
    "clusters",
    "sats_per_cluster",
    "ground_stations",
    "trial",
    "seed",
    "status",
    "rounds",
    "final_accuracy",
    "max_accuracy",
    "time_to_target_s",
    "total_span_s",
    "mean_round_duration_s",
    "oap_mw",
)

HEATMAP_METRICS = (
    "final_accuracy",
    "max_accuracy",
    "time_to_target_s",
    "mean_round_duration_s",
    "rounds",
    "total_span_s",
)


@dataclass(frozen=True)
class SweepRow:
    clusters: int
    sats_per_cluster: int
    ground_stations: int
    trial: int
    seed: int
    status: str
    rounds: int = 0
    final_accuracy: float = 0.0
    max_accuracy: float = 0.0
    time_to_target_s: float | None = None
    total_span_s: float = 0.0
    mean_round_duration_s: float = 0.0
    oap_mw: float = 0.0

    def metric(self, name: str) -> float | None:
        if self.status != "ok":
            return None
        value = getattr(self, name)
        return None if value is None else float(value)


@dataclass(frozen=True)
class SweepResult:
    rows: list[SweepRow]
    schema_version: int = SCHEMA_VERSION


def _cell_scenario(base: ScenarioConfig, clusters: int, sats: int, gs: int, trial: int) -> ScenarioConfig:
    return dataclasses.replace(
        base,
        constellation=ConstellationConfig(
            clusters=clusters,
            sats_per_cluster=sats,
            altitude_km=base.constellation.altitude_km,
            inclination_deg=base.constellation.inclination_deg,
        ),
        ground=GroundSegmentConfig(
            file=base.ground.file,
            count=gs,
            min_elevation_deg=base.ground.min_elevation_deg,
        ),
        seed=base.seed + trial,
    )


def _run_cell(args: tuple[ScenarioConfig, int, int, int, int]) -> SweepRow:
    scenario, clusters, sats, gs, trial = args
    try:
        report = run_scenario(scenario)
    except ValueError as exc:
        return SweepRow(clusters, sats, gs, trial, scenario.seed, f"config-error: {exc}")
    if report.insufficient_clients:
        return SweepRow(clusters, sats, gs, trial, scenario.seed, "insufficient-clients")
    status = "round-incomplete" if report.round_incomplete and not report.rounds else "ok"
    return SweepRow(
        clusters,
        sats,
        gs,
        trial,
        scenario.seed,
        status,
        rounds=report.rounds_completed,
        final_accuracy=report.final_accuracy,
        max_accuracy=report.max_accuracy,
        time_to_target_s=report.time_to_target_s,
        total_span_s=report.total_span_s,
        mean_round_duration_s=report.mean_round_duration_s,
        oap_mw=report.oap_mw,
    )


def run_sweep(cfg: SweepConfig, parallelism: int = 1) -> SweepResult:
    """Run every (clusters, sats, ground stations, trial) cell.

    Per-cell failures become status rows; one bad configuration never
    aborts the grid. Trial i reuses the base scenario with seed base+i, so
    repeating a sweep with the same base seed reproduces every cell.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    tasks = [
        (_cell_scenario(cfg.base, clusters, sats, gs, trial), clusters, sats, gs, trial)
        for clusters in cfg.axes.clusters
        for sats in cfg.axes.sats_per_cluster
        for gs in cfg.axes.ground_stations
        for trial in range(cfg.trials)
    ]
    if parallelism == 1:
        rows = [_run_cell(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            rows = list(pool.map(_run_cell, tasks))
    return SweepResult(rows=rows)


def _format_cell(value: float | None) -> str:
    return "" if value is None else repr(value)


def write_sweep_csv(result: SweepResult, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for r in result.rows:
            writer.writerow(
                [
                    result.schema_version,
                    r.clusters,
                    r.sats_per_cluster,
                    r.ground_stations,
                    r.trial,
                    r.seed,
                    r.status,
                    r.rounds,
                    repr(r.final_accuracy),
                    repr(r.max_accuracy),
                    _format_cell(r.time_to_target_s),
                    repr(r.total_span_s),
                    repr(r.mean_round_duration_s),
                    repr(r.oap_mw),
                ]
            )


def read_sweep_csv(path: str | Path) -> SweepResult:
    rows: list[SweepRow] = []
    version = SCHEMA_VERSION
    with open(path, encoding="utf-8", newline="") as fh:
        for rec in csv.DictReader(fh):
            version = int(rec["schema_version"])
            rows.append(
                SweepRow(
                    clusters=int(rec["clusters"]),
                    sats_per_cluster=int(rec["sats_per_cluster"]),
                    ground_stations=int(rec["ground_stations"]),
                    trial=int(rec["trial"]),
                    seed=int(rec["seed"]),
                    status=rec["status"],
                    rounds=int(rec["rounds"]),
                    final_accuracy=float(rec["final_accuracy"]),
                    max_accuracy=float(rec["max_accuracy"]),
                    time_to_target_s=float(rec["time_to_target_s"]) if rec["time_to_target_s"] else None,
                    total_span_s=float(rec["total_span_s"]),
                    mean_round_duration_s=float(rec["mean_round_duration_s"]),
                    oap_mw=float(rec["oap_mw"]),
                )
            )
    return SweepResult(rows=rows, schema_version=version)


def heatmap_table(
    result: SweepResult, metric: str, ground_stations: int | None = None
) -> tuple[list[int], list[int], list[list[float | None]]]:
    """Mean metric over trials, rows by sats ascending, cols by clusters.

    Cells whose every trial failed stay None. When ground_stations is not
    given, the largest swept count is used.
    """
    if metric not in HEATMAP_METRICS:
        raise ValueError(f"unknown heatmap metric {metric!r} (allowed: {list(HEATMAP_METRICS)})")
    pool = result.rows
    if ground_stations is None:
        usable = [r.ground_stations for r in pool]
        if not usable:
            raise ValueError("sweep result is empty")
        ground_stations = max(usable)
    pool = [r for r in pool if r.ground_stations == ground_stations]
    if not pool:
        raise ValueError(f"no sweep rows with {ground_stations} ground stations")
    sats_axis = sorted({r.sats_per_cluster for r in pool})
    cluster_axis = sorted({r.clusters for r in pool})
    grid: list[list[float | None]] = []
    for sats in sats_axis:
        line: list[float | None] = []
        for clusters in cluster_axis:
            vals = [
                v
                for r in pool
                if r.sats_per_cluster == sats and r.clusters == clusters
                for v in [r.metric(metric)]
                if v is not None
            ]
            line.append(sum(vals) / len(vals) if vals else None)
        grid.append(line)
    return sats_axis, cluster_axis, grid


def write_heatmap_csv(
    result: SweepResult, metric: str, path: str | Path, ground_stations: int | None = None
) -> None:
    sats_axis, cluster_axis, grid = heatmap_table(result, metric, ground_stations)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sats_per_cluster"] + [str(c) for c in cluster_axis])
        for sats, line in zip(sats_axis, grid):
            writer.writerow([sats] + [_format_cell(v) for v in line])
