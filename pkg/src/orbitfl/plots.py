"""Figure rendering for run and sweep reports. Headless backend, PNG files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  backend must be pinned first
import numpy as np  # noqa: E402

from .contacts import ContactWindow  # noqa: E402
from .simulation import MetricsReport  # noqa: E402
from .sweep import SweepResult, heatmap_table  # noqa: E402

_HOUR = 3600.0


def plot_accuracy(reports: list[MetricsReport], path: str | Path, labels: list[str] | None = None) -> None:
    """Accuracy against simulated time, one line per report."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for i, report in enumerate(reports):
        if not report.accuracy_trace:
            continue
        times = [t / _HOUR for t, _ in report.accuracy_trace]
        accs = [a for _, a in report.accuracy_trace]
        name = labels[i] if labels else report.strategy
        ax.plot(times, accs, marker=".", markersize=3, label=name)
    ax.set_xlabel("simulated time [h]")
    ax.set_ylabel("held-out accuracy")
    ax.set_ylim(0.0, 1.0)
    ax.grid(True, alpha=0.3)
    if len(reports) > 1 or labels:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_round_durations(report: MetricsReport, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    idx = [r.round_index for r in report.rounds]
    durations = [r.duration_s / _HOUR for r in report.rounds]
    ax.bar(idx, durations, width=0.85)
    ax.set_xlabel("round")
    ax.set_ylabel("duration [h]")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_phase_breakdown(report: MetricsReport, path: str | Path) -> None:
    """Stacked mean per-client communication, compute, and idle time per round."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    idx = [r.round_index for r in report.rounds]
    comm = np.array([r.comm_s for r in report.rounds]) / _HOUR
    compute = np.array([r.compute_s for r in report.rounds]) / _HOUR
    idle = np.array([r.idle_s for r in report.rounds]) / _HOUR
    ax.bar(idx, comm, label="communication")
    ax.bar(idx, compute, bottom=comm, label="compute")
    ax.bar(idx, idle, bottom=comm + compute, label="idle")
    ax.set_xlabel("round")
    ax.set_ylabel("mean time per client [h]")
    ax.legend()
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_heatmap(
    result: SweepResult,
    metric: str,
    path: str | Path,
    ground_stations: int | None = None,
) -> None:
    """Metric heatmap, satellites per cluster on rows, clusters on columns."""
    sats_axis, cluster_axis, grid = heatmap_table(result, metric, ground_stations)
    data = np.array([[np.nan if v is None else v for v in line] for line in grid], dtype=float)
    fig, ax = plt.subplots(figsize=(1.2 + 0.9 * len(cluster_axis), 1.0 + 0.6 * len(sats_axis)))
    im = ax.imshow(data, aspect="auto", origin="lower", cmap="viridis")
    ax.set_xticks(range(len(cluster_axis)), [str(c) for c in cluster_axis])
    ax.set_yticks(range(len(sats_axis)), [str(s) for s in sats_axis])
    ax.set_xlabel("clusters")
    ax.set_ylabel("satellites per cluster")
    for i in range(len(sats_axis)):
        for j in range(len(cluster_axis)):
            if not np.isnan(data[i, j]):
                ax.text(j, i, f"{data[i, j]:.3g}", ha="center", va="center", fontsize=7, color="white")
    fig.colorbar(im, ax=ax, label=metric)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_windows_timeline(windows: list[ContactWindow], path: str | Path, max_lanes: int = 60) -> None:
    """Horizontal bars of contact windows, one lane per (kind, pair)."""
    lanes: dict[tuple[str, int, int], list[ContactWindow]] = {}
    for w in sorted(windows, key=lambda w: (w.kind, w.a, w.b, w.start_s)):
        lanes.setdefault((w.kind, w.a, w.b), []).append(w)
    keys = list(lanes)[:max_lanes]
    fig, ax = plt.subplots(figsize=(9, max(3.0, 0.22 * len(keys) + 1.2)))
    colors = {"sat-gs": "tab:blue", "intra-sl": "tab:green", "inter-sl": "tab:orange"}
    for lane, key in enumerate(keys):
        for w in lanes[key]:
            ax.barh(
                lane,
                (w.end_s - w.start_s) / _HOUR,
                left=w.start_s / _HOUR,
                height=0.7,
                color=colors.get(key[0], "gray"),
            )
    ax.set_yticks(range(len(keys)), [f"{k}:{a}-{b}" for k, a, b in keys], fontsize=6)
    ax.set_xlabel("time [h]")
    ax.grid(True, axis="x", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
