"""Scenario runner: ties orbits, windows, protocols, and metrics together."""

from __future__ import annotations

import numpy as np

from .config import ScenarioConfig
from .contacts import (
    INTER_SL,
    INTRA_SL,
    ContactWindow,
    compute_access_windows,
    compute_isl_windows,
)
from .learning import (
    ClientDataset,
    init_params,
    load_csv_dataset,
    partition,
    synthetic_blobs,
)
from .orbital import Constellation, GroundStation, build_walker_star
from .simulation import MetricsReport, orbital_average_power_mw
from .strategies import RunContext, StaticWindowProvider, run_strategy

_CHUNK_S = 2 * 86400.0


class LazyWindowProvider(StaticWindowProvider):
    """Materializes contact windows in multi-day chunks on demand.

    Persistent intra-plane windows are cheap and computed up front for the
    whole horizon; ground contacts and cross-plane windows are scanned
    chunk by chunk as the strategies ask for more future. A window cut at
    a chunk edge is merged with its continuation when the next chunk
    arrives, so chunking never changes the window set.
    """

    def __init__(
        self,
        constellation: Constellation,
        stations: list[GroundStation],
        horizon_s: float,
        *,
        need_gs: bool = True,
        need_intra: bool = False,
        need_inter: bool = False,
        chunk_s: float = _CHUNK_S,
    ) -> None:
        if horizon_s <= 0:
            raise ValueError("horizon_s must be positive")
        if chunk_s <= 0:
            raise ValueError("chunk_s must be positive")
        self._constellation_ref = constellation
        self._stations = stations
        self._need_gs = need_gs and bool(stations)
        self._need_inter = need_inter
        self._chunk_s = chunk_s
        self._computed_until = 0.0
        initial: list[ContactWindow] = []
        if need_intra:
            initial.extend(
                compute_isl_windows(constellation, 0.0, horizon_s, kinds=(INTRA_SL,))
            )
        super().__init__(initial, constellation, start_s=0.0, horizon_end_s=horizon_s)
        self.extend()

    def extend(self) -> bool:
        if self._computed_until >= self.horizon_end_s:
            return False
        t0 = self._computed_until
        t1 = min(t0 + self._chunk_s, self.horizon_end_s)
        fresh: list[ContactWindow] = []
        if self._need_gs:
            fresh.extend(
                compute_access_windows(self._constellation_ref, self._stations, t0, t1)
            )
        if self._need_inter:
            fresh.extend(
                compute_isl_windows(self._constellation_ref, t0, t1, kinds=(INTER_SL,))
            )
        # Stitch windows that were clipped at the previous chunk edge.
        open_at_edge = {
            (w.kind, w.a, w.b): w for w in self._windows if w.end_s == t0 and w.kind != INTRA_SL
        }
        merged: list[ContactWindow] = []
        for w in fresh:
            prior = open_at_edge.pop((w.kind, w.a, w.b), None) if w.start_s == t0 else None
            if prior is not None:
                self._windows.remove(prior)
                merged.append(ContactWindow(w.kind, w.a, w.b, prior.start_s, w.end_s))
            else:
                merged.append(w)
        self._computed_until = t1
        self._absorb(merged)
        return True


def _split_holdout(dataset: ClientDataset, every: int = 5) -> tuple[ClientDataset, ClientDataset]:
    """Deterministic stratified split: every `every`-th sample per class held out."""
    order = np.argsort(dataset.labels, kind="stable")
    test_mask = np.zeros(len(dataset), dtype=bool)
    test_mask[order[::every]] = True
    return (
        ClientDataset(dataset.features[~test_mask], dataset.labels[~test_mask]),
        ClientDataset(dataset.features[test_mask], dataset.labels[test_mask]),
    )


def build_scenario_data(cfg: ScenarioConfig, num_clients: int):
    """Client shards, held-out evaluation set, and zeroed initial model."""
    if cfg.data.file is not None:
        full = load_csv_dataset(cfg.data.file)
        train_set, test_set = _split_holdout(full)
    else:
        train_set, test_set = synthetic_blobs(
            cfg.seed,
            num_classes=cfg.data.num_classes,
            dim=cfg.data.dim,
            train_per_class=cfg.data.train_per_class,
            test_per_class=cfg.data.test_per_class,
        )
    clients = partition(train_set, num_clients, shards_per_client=cfg.data.shards_per_client, seed=cfg.seed)
    num_classes = int(train_set.labels.max()) + 1
    params = init_params(num_classes, train_set.features.shape[1])
    return clients, test_set, params


def build_provider(cfg: ScenarioConfig, constellation: Constellation) -> LazyWindowProvider:
    kind = cfg.strategy.kind
    return LazyWindowProvider(
        constellation,
        cfg.ground.stations() if kind != "autoflsat" else [],
        cfg.horizon_s,
        need_gs=kind != "autoflsat",
        need_intra=cfg.strategy.use_intra_sl or kind == "autoflsat",
        need_inter=kind == "autoflsat",
    )


def run_scenario(cfg: ScenarioConfig) -> MetricsReport:
    """Simulate one configuration end to end.

    Fewer than two satellites cannot form a federation; that case returns
    a report flagged insufficient_clients instead of raising, so sweeps
    can record the cell and continue.
    """
    constellation = build_walker_star(
        cfg.constellation.clusters,
        cfg.constellation.sats_per_cluster,
        altitude_km=cfg.constellation.altitude_km,
        inclination_deg=cfg.constellation.inclination_deg,
    )
    num_sats = constellation.num_satellites
    if num_sats < 2:
        return MetricsReport(
            strategy=cfg.strategy.kind, seed=cfg.seed, insufficient_clients=True
        )

    clients, test_set, params = build_scenario_data(cfg, num_sats)
    provider = build_provider(cfg, constellation)
    ctx = RunContext(
        provider=provider,
        strategy=cfg.strategy,
        train=cfg.train,
        comm=cfg.comm,
        clients=clients,
        test_set=test_set,
        initial_params=params,
        seed=cfg.seed,
        max_rounds=cfg.max_rounds,
        target_accuracy=cfg.target_accuracy,
    )
    outcome = run_strategy(ctx)

    time_to_target = None
    if cfg.target_accuracy is not None:
        for t_acc, acc in outcome.accuracy_trace:
            if acc >= cfg.target_accuracy:
                time_to_target = t_acc
                break
    return MetricsReport(
        strategy=cfg.strategy.kind,
        seed=cfg.seed,
        rounds=outcome.records,
        accuracy_trace=outcome.accuracy_trace,
        target_accuracy=cfg.target_accuracy,
        time_to_target_s=time_to_target,
        total_span_s=outcome.end_s,
        oap_mw=orbital_average_power_mw(cfg.power),
        round_incomplete=outcome.round_incomplete,
    )


def scenario_windows(
    cfg: ScenarioConfig,
    until_s: float,
    kinds: tuple[str, ...],
) -> list[ContactWindow]:
    """Contact windows of a scenario over [0, until_s], for inspection."""
    if until_s <= 0:
        raise ValueError("until_s must be positive")
    constellation = build_walker_star(
        cfg.constellation.clusters,
        cfg.constellation.sats_per_cluster,
        altitude_km=cfg.constellation.altitude_km,
        inclination_deg=cfg.constellation.inclination_deg,
    )
    windows: list[ContactWindow] = []
    if "sat-gs" in kinds:
        windows.extend(compute_access_windows(constellation, cfg.ground.stations(), 0.0, until_s))
    isl_kinds = tuple(k for k in kinds if k in (INTRA_SL, INTER_SL))
    if isl_kinds:
        windows.extend(compute_isl_windows(constellation, 0.0, until_s, kinds=isl_kinds))
    return sorted(windows, key=lambda w: (w.start_s, w.kind, w.a, w.b))
