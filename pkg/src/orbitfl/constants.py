"""Physical constants and simulation-wide defaults.

All distances are kilometres, all times seconds, all angles degrees unless a
name says otherwise. Simulation time is seconds since the scenario epoch
(2024-04-14T00:00:00Z); the inertial and Earth-fixed frames coincide at t=0.
"""

import math

EARTH_RADIUS_KM = 6371.0
EARTH_MU_KM3_S2 = 398600.4418
EARTH_ROTATION_RAD_S = 7.2921159e-5

SCENARIO_EPOCH_ISO = "2024-04-14T00:00:00Z"

# Contact geometry defaults.
DEFAULT_MIN_ELEVATION_DEG = 10.0
ISL_GRAZING_MARGIN_KM = 100.0

# Window search defaults.
SCAN_STEP_S = 10.0
REFINE_TOL_S = 0.1

# Simulation horizon and round cap.
DEFAULT_HORIZON_S = 90 * 86400.0
MAX_ROUNDS = 500

SECONDS_PER_HOUR = 3600.0


def orbital_radius_km(altitude_km: float) -> float:
    """Circular orbit radius for an altitude above the mean Earth radius."""
    return EARTH_RADIUS_KM + altitude_km


def orbital_period_s(altitude_km: float) -> float:
    """Keplerian period of a circular orbit, 2*pi*sqrt(a^3/mu)."""
    a = orbital_radius_km(altitude_km)
    if a <= 0:
        raise ValueError(f"orbit radius must be positive, got {a} km")
    return 2.0 * math.pi * math.sqrt(a**3 / EARTH_MU_KM3_S2)
