"""YAML scenario and sweep configuration.

Unknown keys are rejected with the offending key named, so a typo fails
loudly instead of silently running defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .constants import DEFAULT_HORIZON_S, DEFAULT_MIN_ELEVATION_DEG, MAX_ROUNDS
from .learning import TrainConfig
from .orbital import GroundStation, default_ground_stations, load_ground_stations
from .simulation import CommModel, PowerModel
from .strategies import StrategyConfig

_AUGMENTATIONS = ("schedule", "schedule_v2", "intra_sl")


@dataclass(frozen=True)
class ConstellationConfig:
    clusters: int = 5
    sats_per_cluster: int = 10
    altitude_km: float = 500.0
    inclination_deg: float = 90.0

    def __post_init__(self) -> None:
        if self.clusters < 1 or self.sats_per_cluster < 1:
            raise ValueError("clusters and sats_per_cluster must be >= 1")


@dataclass(frozen=True)
class GroundSegmentConfig:
    file: str | None = None
    count: int | None = None
    min_elevation_deg: float | None = None

    def stations(self) -> list[GroundStation]:
        stations = load_ground_stations(self.file) if self.file else default_ground_stations()
        if self.count is not None:
            if not 0 <= self.count <= len(stations):
                raise ValueError(f"ground station count {self.count} outside 0..{len(stations)}")
            stations = stations[: self.count]
        if self.min_elevation_deg is not None:
            stations = [
                GroundStation(s.name, s.lat_deg, s.lon_deg, self.min_elevation_deg) for s in stations
            ]
        return stations


@dataclass(frozen=True)
class DataConfig:
    file: str | None = None
    num_classes: int = 10
    dim: int = 16
    train_per_class: int = 200
    test_per_class: int = 50
    shards_per_client: int = 2


@dataclass(frozen=True)
class ScenarioConfig:
    constellation: ConstellationConfig = field(default_factory=ConstellationConfig)
    ground: GroundSegmentConfig = field(default_factory=GroundSegmentConfig)
    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    data: DataConfig = field(default_factory=DataConfig)
    comm: CommModel = field(default_factory=CommModel)
    power: PowerModel = field(default_factory=PowerModel)
    seed: int = 0
    horizon_s: float = DEFAULT_HORIZON_S
    max_rounds: int = MAX_ROUNDS
    target_accuracy: float | None = None

    def __post_init__(self) -> None:
        if self.horizon_s <= 0:
            raise ValueError("horizon_s must be positive")
        if not 1 <= self.max_rounds <= MAX_ROUNDS:
            raise ValueError(f"max_rounds must be within 1..{MAX_ROUNDS}")
        if self.target_accuracy is not None and not 0.0 < self.target_accuracy <= 1.0:
            raise ValueError("target_accuracy must be in (0, 1]")


@dataclass(frozen=True)
class SweepAxes:
    clusters: tuple[int, ...] = (1, 2, 3, 4, 5)
    sats_per_cluster: tuple[int, ...] = (1, 5, 10, 15, 20)
    ground_stations: tuple[int, ...] = (1, 5, 13)

    def __post_init__(self) -> None:
        for name, axis in (
            ("clusters", self.clusters),
            ("sats_per_cluster", self.sats_per_cluster),
            ("ground_stations", self.ground_stations),
        ):
            if not axis:
                raise ValueError(f"sweep axis {name} is empty")
            if list(axis) != sorted(set(axis)):
                raise ValueError(f"sweep axis {name} must be strictly increasing")


@dataclass(frozen=True)
class SweepConfig:
    base: ScenarioConfig = field(default_factory=ScenarioConfig)
    axes: SweepAxes = field(default_factory=SweepAxes)
    trials: int = 5

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


def _require_mapping(raw: object, where: str) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ValueError(f"{where} must be a mapping, got {type(raw).__name__}")
    return raw


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    for key in section:
        if key not in allowed:
            raise ValueError(f"unknown key {key!r} in {where} (allowed: {sorted(allowed)})")


def _strategy_from(section: dict) -> StrategyConfig:
    _check_keys(
        section,
        {"kind", "max_clients_per_round", "buffer_size", "staleness_bound", "augmentations"},
        "strategy",
    )
    augmentations = section.get("augmentations", [])
    if not isinstance(augmentations, (list, tuple)):
        raise ValueError("strategy.augmentations must be a list")
    for aug in augmentations:
        if aug not in _AUGMENTATIONS:
            raise ValueError(f"unknown augmentation {aug!r} (allowed: {list(_AUGMENTATIONS)})")
    return StrategyConfig(
        kind=section.get("kind", "fedavg"),
        max_clients_per_round=section.get("max_clients_per_round", 10),
        buffer_size=section.get("buffer_size"),
        staleness_bound=section.get("staleness_bound", 3),
        use_schedule="schedule" in augmentations,
        use_schedule_v2="schedule_v2" in augmentations,
        use_intra_sl="intra_sl" in augmentations,
    )


def _train_from(section: dict) -> TrainConfig:
    allowed = {
        "batch_size",
        "local_epochs",
        "learning_rate",
        "prox_mu",
        "min_epochs",
        "throughput_samples_per_s",
        "max_gap_epochs",
    }
    _check_keys(section, allowed, "train")
    return TrainConfig(**section)


def _comm_from(section: dict) -> CommModel:
    _check_keys(section, {"data_rate_bytes_per_s", "bits_per_param", "param_count"}, "comm")
    return CommModel(
        data_rate_bytes_per_s=section.get("data_rate_bytes_per_s", 1_000_000.0),
        bits_per_param=section.get("bits_per_param", 32),
        param_count_override=section.get("param_count"),
    )


def _power_from(section: dict) -> PowerModel:
    allowed = {
        "low_power_idle_mw",
        "radio_tx_mw",
        "training_mw",
        "training_plus_tx_mw",
        "duty_idle",
        "duty_radio_tx",
        "duty_training",
        "duty_training_plus_tx",
        "count_idle",
    }
    _check_keys(section, allowed, "power")
    return PowerModel(**section)


def _data_from(section: dict) -> DataConfig:
    allowed = {"file", "num_classes", "dim", "train_per_class", "test_per_class", "shards_per_client"}
    _check_keys(section, allowed, "data")
    return DataConfig(**section)


def scenario_from_dict(raw: dict, base_dir: Path | None = None) -> ScenarioConfig:
    raw = _require_mapping(raw, "scenario config")
    allowed = {
        "constellation",
        "ground_stations",
        "strategy",
        "train",
        "data",
        "comm",
        "power",
        "seed",
        "horizon_s",
        "max_rounds",
        "target_accuracy",
    }
    _check_keys(raw, allowed, "scenario config")

    cons = _require_mapping(raw.get("constellation"), "constellation")
    _check_keys(cons, {"clusters", "sats_per_cluster", "altitude_km", "inclination_deg"}, "constellation")
    ground = _require_mapping(raw.get("ground_stations"), "ground_stations")
    _check_keys(ground, {"file", "count", "min_elevation_deg"}, "ground_stations")
    gs_file = ground.get("file")
    if gs_file is not None and base_dir is not None and not Path(gs_file).is_absolute():
        gs_file = str(base_dir / gs_file)
    data_section = _require_mapping(raw.get("data"), "data")
    data_cfg = _data_from(data_section)
    if data_cfg.file is not None and base_dir is not None and not Path(data_cfg.file).is_absolute():
        data_cfg = DataConfig(
            file=str(base_dir / data_cfg.file),
            num_classes=data_cfg.num_classes,
            dim=data_cfg.dim,
            train_per_class=data_cfg.train_per_class,
            test_per_class=data_cfg.test_per_class,
            shards_per_client=data_cfg.shards_per_client,
        )

    return ScenarioConfig(
        constellation=ConstellationConfig(**cons),
        ground=GroundSegmentConfig(
            file=gs_file,
            count=ground.get("count"),
            min_elevation_deg=ground.get("min_elevation_deg"),
        ),
        strategy=_strategy_from(_require_mapping(raw.get("strategy"), "strategy")),
        train=_train_from(_require_mapping(raw.get("train"), "train")),
        data=data_cfg,
        comm=_comm_from(_require_mapping(raw.get("comm"), "comm")),
        power=_power_from(_require_mapping(raw.get("power"), "power")),
        seed=raw.get("seed", 0),
        horizon_s=float(raw.get("horizon_s", DEFAULT_HORIZON_S)),
        max_rounds=raw.get("max_rounds", MAX_ROUNDS),
        target_accuracy=raw.get("target_accuracy"),
    )


def load_scenario(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    return scenario_from_dict(_require_mapping(raw, str(path)), base_dir=path.parent)


def sweep_from_dict(raw: dict, base_dir: Path | None = None) -> SweepConfig:
    raw = dict(_require_mapping(raw, "sweep config"))
    sweep_section = _require_mapping(raw.pop("sweep", None), "sweep")
    _check_keys(sweep_section, {"clusters", "sats_per_cluster", "ground_stations"}, "sweep")
    trials = raw.pop("trials", 5)
    base = scenario_from_dict(raw, base_dir=base_dir)
    axes = SweepAxes(
        clusters=tuple(sweep_section.get("clusters", SweepAxes.clusters)),
        sats_per_cluster=tuple(sweep_section.get("sats_per_cluster", SweepAxes.sats_per_cluster)),
        ground_stations=tuple(sweep_section.get("ground_stations", SweepAxes.ground_stations)),
    )
    return SweepConfig(base=base, axes=axes, trials=trials)


def load_sweep(path: str | Path) -> SweepConfig:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    return sweep_from_dict(_require_mapping(raw, str(path)), base_dir=path.parent)
