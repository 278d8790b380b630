"""Circular-orbit geometry for constellation contact analysis.

Satellites fly unperturbed circular two-body orbits; ground stations sit on a
spherical rotating Earth. Everything is expressed in an Earth-centered inertial
frame that coincides with the Earth-fixed frame at t=0, so a ground station's
inertial longitude simply advances at the sidereal rate. This is deliberately
simple: drag, J2 and TLE-grade propagation are out of scope, round-trip
timing is dominated by access geometry rather than by metre-level accuracy.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .constants import (
    DEFAULT_MIN_ELEVATION_DEG,
    EARTH_RADIUS_KM,
    EARTH_ROTATION_RAD_S,
    orbital_period_s,
    orbital_radius_km,
)


@dataclass(frozen=True)
class OrbitState:
    """A satellite on a circular orbit.

    Attributes:
        altitude_km: Height above the mean Earth radius; must be positive.
        inclination_deg: Orbital plane inclination.
        raan_deg: Right ascension of the ascending node at epoch.
        anomaly_deg: Argument of latitude at epoch (angle from the ascending
            node along the orbit; for circular orbits this is the single
            phase parameter).
    """

    altitude_km: float
    inclination_deg: float
    raan_deg: float
    anomaly_deg: float

    def __post_init__(self) -> None:
        if self.altitude_km <= 0:
            raise ValueError(f"altitude_km must be positive, got {self.altitude_km}")

    @property
    def radius_km(self) -> float:
        return orbital_radius_km(self.altitude_km)

    @property
    def period_s(self) -> float:
        return orbital_period_s(self.altitude_km)


@dataclass(frozen=True)
class GroundStation:
    """A named ground site with its own elevation mask."""

    name: str
    lat_deg: float
    lon_deg: float
    min_elevation_deg: float = DEFAULT_MIN_ELEVATION_DEG

    def __post_init__(self) -> None:
        if not -90.0 <= self.lat_deg <= 90.0:
            raise ValueError(f"latitude out of range for {self.name}: {self.lat_deg}")
        if not -180.0 <= self.lon_deg <= 180.0:
            raise ValueError(f"longitude out of range for {self.name}: {self.lon_deg}")


def propagate(orbit: OrbitState, t_s: float) -> np.ndarray:
    """Inertial position of a satellite at time t_s, as a (3,) km vector."""
    return propagate_many(orbit, np.asarray([t_s], dtype=float))[0]


def propagate_many(orbit: OrbitState, times_s: np.ndarray) -> np.ndarray:
    """Vectorized circular two-body propagation.

    The argument of latitude advances uniformly: u(t) = u0 + 360*t/T. The
    in-plane position is rotated by inclination about x and by RAAN about z.

    Args:
        orbit: Orbit to propagate.
        times_s: Array of times in seconds since epoch.

    Returns:
        (N, 3) array of inertial positions in km; every row has norm equal
        to the orbit radius.
    """
    times_s = np.asarray(times_s, dtype=float)
    a = orbit.radius_km
    u = np.radians(orbit.anomaly_deg) + 2.0 * math.pi * times_s / orbit.period_s
    cos_u, sin_u = np.cos(u), np.sin(u)
    inc = math.radians(orbit.inclination_deg)
    raan = math.radians(orbit.raan_deg)
    cos_i, sin_i = math.cos(inc), math.sin(inc)
    cos_o, sin_o = math.cos(raan), math.sin(raan)
    x = a * (cos_u * cos_o - sin_u * cos_i * sin_o)
    y = a * (cos_u * sin_o + sin_u * cos_i * cos_o)
    z = a * (sin_u * sin_i)
    return np.stack([x, y, z], axis=-1)


def ground_position(station: GroundStation, t_s: float) -> np.ndarray:
    """Inertial position of a ground station at time t_s, as a (3,) km vector."""
    return ground_position_many(station, np.asarray([t_s], dtype=float))[0]


def ground_position_many(station: GroundStation, times_s: np.ndarray) -> np.ndarray:
    """Station positions on the rotating spherical Earth, (N, 3) km."""
    times_s = np.asarray(times_s, dtype=float)
    lat = math.radians(station.lat_deg)
    lon = math.radians(station.lon_deg) + EARTH_ROTATION_RAD_S * times_s
    cos_lat = math.cos(lat)
    x = EARTH_RADIUS_KM * cos_lat * np.cos(lon)
    y = EARTH_RADIUS_KM * cos_lat * np.sin(lon)
    z = EARTH_RADIUS_KM * math.sin(lat) * np.ones_like(times_s)
    return np.stack([x, y, z], axis=-1)


def elevation_deg(sat_pos_km: np.ndarray, station_pos_km: np.ndarray) -> float:
    """Elevation of a satellite above a station's local horizon.

    Args:
        sat_pos_km: Satellite inertial position, (3,).
        station_pos_km: Station inertial position, (3,); must be nonzero.

    Returns:
        Elevation in degrees: +90 at zenith, -90 at nadir.

    Raises:
        ValueError: If the two positions coincide or the station sits at the
            Earth center (local vertical undefined).
    """
    return float(
        elevation_deg_many(
            np.asarray(sat_pos_km, dtype=float)[None, :],
            np.asarray(station_pos_km, dtype=float)[None, :],
        )[0]
    )


def elevation_deg_many(sat_pos_km: np.ndarray, station_pos_km: np.ndarray) -> np.ndarray:
    """Vectorized elevation; see elevation_deg. Inputs broadcast to (N, 3)."""
    sat = np.asarray(sat_pos_km, dtype=float)
    gs = np.asarray(station_pos_km, dtype=float)
    d = sat - gs
    d_norm = np.linalg.norm(d, axis=-1)
    gs_norm = np.linalg.norm(gs, axis=-1)
    if np.any(gs_norm == 0.0):
        raise ValueError("station position at Earth center has no local vertical")
    if np.any(d_norm == 0.0):
        raise ValueError("satellite and station positions coincide")
    sin_el = np.einsum("...i,...i->...", gs, d) / (gs_norm * d_norm)
    return np.degrees(np.arcsin(np.clip(sin_el, -1.0, 1.0)))


def segment_clearance_km(p1_km: np.ndarray, p2_km: np.ndarray) -> float:
    """Minimum distance from the Earth center to the segment p1-p2."""
    return float(
        segment_clearance_many(
            np.asarray(p1_km, dtype=float)[None, :],
            np.asarray(p2_km, dtype=float)[None, :],
        )[0]
    )


def segment_clearance_many(p1_km: np.ndarray, p2_km: np.ndarray) -> np.ndarray:
    """Vectorized segment-to-origin distance for LOS tests, (N,) km."""
    p1 = np.asarray(p1_km, dtype=float)
    p2 = np.asarray(p2_km, dtype=float)
    v = p2 - p1
    vv = np.einsum("...i,...i->...", v, v)
    # Parameter of the closest point, clamped to the segment; degenerate
    # (zero-length) segments fall back to the endpoint itself.
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(vv > 0.0, -np.einsum("...i,...i->...", p1, v) / np.where(vv > 0.0, vv, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    closest = p1 + t[..., None] * v
    return np.linalg.norm(closest, axis=-1)


def line_of_sight(p1_km: np.ndarray, p2_km: np.ndarray, grazing_radius_km: float) -> bool:
    """True iff the segment between two positions clears the grazing sphere.

    Both endpoints must lie at or above the grazing radius; the test then
    reduces to whether the segment's closest approach to the Earth center
    stays at or above it.
    """
    return bool(segment_clearance_km(p1_km, p2_km) >= grazing_radius_km)


@dataclass(frozen=True)
class Constellation:
    """A Walker-star constellation: satellites grouped into orbital planes.

    Satellite ids are cluster-major: satellite j of cluster i has id
    i * sats_per_cluster + j.
    """

    orbits: tuple[OrbitState, ...]
    num_clusters: int
    sats_per_cluster: int

    def __post_init__(self) -> None:
        if self.num_clusters < 1 or self.sats_per_cluster < 1:
            raise ValueError("num_clusters and sats_per_cluster must be >= 1")
        if len(self.orbits) != self.num_clusters * self.sats_per_cluster:
            raise ValueError(
                f"{len(self.orbits)} orbits do not fill "
                f"{self.num_clusters} x {self.sats_per_cluster} slots"
            )

    @property
    def num_satellites(self) -> int:
        return len(self.orbits)

    @property
    def altitude_km(self) -> float:
        return self.orbits[0].altitude_km

    def cluster_of(self, sat_id: int) -> int:
        return sat_id // self.sats_per_cluster

    def cluster_members(self, cluster: int) -> range:
        lo = cluster * self.sats_per_cluster
        return range(lo, lo + self.sats_per_cluster)


def build_walker_star(
    num_clusters: int,
    sats_per_cluster: int,
    altitude_km: float = 500.0,
    inclination_deg: float = 90.0,
) -> Constellation:
    """Build a Walker-star constellation.

    Planes (clusters) spread their ascending nodes over half the equator,
    cluster i at RAAN i*180/num_clusters; satellites within a plane are
    evenly phased, satellite j at anomaly j*360/sats_per_cluster. There is
    no inter-plane phase offset.

    Args:
        num_clusters: Number of orbital planes, >= 1.
        sats_per_cluster: Satellites per plane, >= 1.
        altitude_km: Shared circular-orbit altitude.
        inclination_deg: Shared inclination; 90 gives polar planes.

    Returns:
        Constellation with cluster-major satellite ids.

    Raises:
        ValueError: If either count is < 1 or the altitude is not positive.
    """
    if num_clusters < 1:
        raise ValueError(f"num_clusters must be >= 1, got {num_clusters}")
    if sats_per_cluster < 1:
        raise ValueError(f"sats_per_cluster must be >= 1, got {sats_per_cluster}")
    orbits = []
    for i in range(num_clusters):
        raan = i * 180.0 / num_clusters
        for j in range(sats_per_cluster):
            orbits.append(
                OrbitState(
                    altitude_km=altitude_km,
                    inclination_deg=inclination_deg,
                    raan_deg=raan,
                    anomaly_deg=j * 360.0 / sats_per_cluster,
                )
            )
    return Constellation(
        orbits=tuple(orbits),
        num_clusters=num_clusters,
        sats_per_cluster=sats_per_cluster,
    )


def load_ground_stations(path) -> list[GroundStation]:
    """Load stations from a CSV file with columns name,lat_deg,lon_deg,min_elevation_deg.

    The min_elevation_deg column may be left empty per row to take the
    default mask. File order is preserved; subsetting a network to its first
    N entries is the supported way to shrink it.
    """
    stations = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"name", "lat_deg", "lon_deg"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(f"station file {path} must have columns name,lat_deg,lon_deg")
        for row in reader:
            mask = row.get("min_elevation_deg") or ""
            stations.append(
                GroundStation(
                    name=row["name"],
                    lat_deg=float(row["lat_deg"]),
                    lon_deg=float(row["lon_deg"]),
                    min_elevation_deg=float(mask) if mask.strip() else DEFAULT_MIN_ELEVATION_DEG,
                )
            )
    return stations


def default_ground_stations() -> list[GroundStation]:
    """The bundled 13-station network, in file order."""
    ref = resources.files("orbitfl").joinpath("data/ground_stations.csv")
    with resources.as_file(ref) as path:
        return load_ground_stations(path)
