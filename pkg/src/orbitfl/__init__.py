"""Discrete-event simulator for federated learning over polar satellite
constellations: orbits, contact windows, link scheduling, four federation
protocols, and constellation-size sweeps."""

from .config import (
    ConstellationConfig,
    DataConfig,
    GroundSegmentConfig,
    ScenarioConfig,
    SweepAxes,
    SweepConfig,
    load_scenario,
    load_sweep,
)
from .constants import (
    DEFAULT_HORIZON_S,
    EARTH_MU_KM3_S2,
    EARTH_RADIUS_KM,
    EARTH_ROTATION_RAD_S,
    MAX_ROUNDS,
    orbital_period_s,
    orbital_radius_km,
)
from .contacts import (
    INTER_SL,
    INTRA_SL,
    SAT_GS,
    ClusterConnectionPlan,
    ContactWindow,
    PlanEntry,
    ScheduleEntry,
    SchedulingHorizonExhausted,
    compute_access_windows,
    compute_isl_windows,
    contact_events,
    fl_schedule,
    inter_plane_window_length,
    inter_sl_scheduler,
    intra_sl_schedule,
    min_ring_size,
    read_windows_csv,
    windows_to_csv,
)
from .engine import LazyWindowProvider, run_scenario, scenario_windows
from .learning import (
    ClientDataset,
    ModelParams,
    TrainConfig,
    aggregate,
    aggregate_in_place,
    evaluate,
    init_params,
    load_csv_dataset,
    local_train,
    loss_and_gradient,
    partition,
    payload_bytes,
    quantize_roundtrip,
    synthetic_blobs,
    train_rng,
)
from .orbital import (
    Constellation,
    GroundStation,
    OrbitState,
    build_walker_star,
    default_ground_stations,
    elevation_deg,
    ground_position,
    line_of_sight,
    load_ground_stations,
    propagate,
    propagate_many,
)
from .simulation import (
    CommModel,
    MetricsReport,
    PhaseTimeline,
    PowerModel,
    RoundRecord,
    idle_breakdown,
    measured_power,
    orbital_average_power_mw,
    transmission_time_s,
)
from .strategies import RunContext, StaticWindowProvider, StrategyConfig, run_strategy
from .sweep import (
    SweepResult,
    SweepRow,
    heatmap_table,
    read_sweep_csv,
    run_sweep,
    write_heatmap_csv,
    write_sweep_csv,
)

__version__ = "0.1.0"

__all__ = [
    "ClientDataset",
    "ClusterConnectionPlan",
    "CommModel",
    "Constellation",
    "ConstellationConfig",
    "ContactWindow",
    "DataConfig",
    "DEFAULT_HORIZON_S",
    "EARTH_MU_KM3_S2",
    "EARTH_RADIUS_KM",
    "EARTH_ROTATION_RAD_S",
    "GroundSegmentConfig",
    "GroundStation",
    "INTER_SL",
    "INTRA_SL",
    "LazyWindowProvider",
    "MAX_ROUNDS",
    "MetricsReport",
    "ModelParams",
    "OrbitState",
    "PhaseTimeline",
    "PlanEntry",
    "PowerModel",
    "RoundRecord",
    "RunContext",
    "SAT_GS",
    "ScenarioConfig",
    "ScheduleEntry",
    "SchedulingHorizonExhausted",
    "StaticWindowProvider",
    "StrategyConfig",
    "SweepAxes",
    "SweepConfig",
    "SweepResult",
    "SweepRow",
    "TrainConfig",
    "aggregate",
    "aggregate_in_place",
    "build_walker_star",
    "compute_access_windows",
    "compute_isl_windows",
    "contact_events",
    "default_ground_stations",
    "elevation_deg",
    "evaluate",
    "fl_schedule",
    "ground_position",
    "heatmap_table",
    "idle_breakdown",
    "measured_power",
    "init_params",
    "inter_plane_window_length",
    "inter_sl_scheduler",
    "intra_sl_schedule",
    "line_of_sight",
    "load_csv_dataset",
    "load_ground_stations",
    "load_scenario",
    "load_sweep",
    "local_train",
    "loss_and_gradient",
    "min_ring_size",
    "orbital_average_power_mw",
    "orbital_period_s",
    "orbital_radius_km",
    "partition",
    "payload_bytes",
    "propagate",
    "propagate_many",
    "quantize_roundtrip",
    "read_sweep_csv",
    "read_windows_csv",
    "run_scenario",
    "run_strategy",
    "run_sweep",
    "scenario_windows",
    "synthetic_blobs",
    "train_rng",
    "transmission_time_s",
    "windows_to_csv",
    "write_heatmap_csv",
    "write_sweep_csv",
]
