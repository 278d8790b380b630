"""Contact windows and the schedulers that turn them into training plans.

Windows come in three kinds: satellite-to-ground ("sat-gs"), between adjacent
satellites of one plane ("intra-sl"), and across planes ("inter-sl"). All are
found the same way: a coarse scan of the visibility indicator at a fixed step,
then bisection of each edge down to a small tolerance. Windows shorter than
the scan step are found only if they straddle a scan point; this is a
documented limitation of the coarse-to-fine search.

The schedulers are deterministic: ties are always ordered by satellite id,
then by station (or peer) id.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .constants import (
    EARTH_RADIUS_KM,
    ISL_GRAZING_MARGIN_KM,
    REFINE_TOL_S,
    SCAN_STEP_S,
    orbital_period_s,
    orbital_radius_km,
)
from .orbital import (
    Constellation,
    GroundStation,
    OrbitState,
    elevation_deg,
    elevation_deg_many,
    ground_position,
    ground_position_many,
    propagate,
    propagate_many,
    segment_clearance_km,
    segment_clearance_many,
)

SAT_GS = "sat-gs"
INTRA_SL = "intra-sl"
INTER_SL = "inter-sl"

# Points per scan chunk; bounds peak memory of the vectorized sweeps.
_CHUNK_POINTS = 50_000


class SchedulingHorizonExhausted(RuntimeError):
    """Raised when the window horizon ends before a schedule can complete."""


@dataclass(frozen=True)
class ContactWindow:
    """A contiguous interval during which one link is available.

    Attributes:
        kind: One of "sat-gs", "intra-sl", "inter-sl".
        a: Satellite id.
        b: Station id for "sat-gs" windows, otherwise the second satellite id.
        start_s: Window start, seconds since epoch.
        end_s: Window end; always strictly greater than start_s.
    """

    kind: str
    a: int
    b: int
    start_s: float
    end_s: float

    def __post_init__(self) -> None:
        if self.end_s <= self.start_s:
            raise ValueError(f"window must have positive length, got [{self.start_s}, {self.end_s}]")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class ScheduleEntry:
    """One scheduled client: dispatch contact plus return opportunity.

    via is the station id for a direct return, or the relaying satellite id
    when the parameters come back through intra-plane links.
    """

    satellite: int
    first_contact_s: float
    return_s: float
    via: int
    relayed: bool = False


@dataclass(frozen=True)
class PlanEntry:
    """One cross-plane exchange: which satellites meet, and when."""

    cluster_a: int
    cluster_b: int
    sat_a: int
    sat_b: int
    window: ContactWindow
    contact_s: float
    completion_s: float


@dataclass(frozen=True)
class ClusterConnectionPlan:
    """Exchange windows covering every unordered cluster pair once."""

    entries: tuple[PlanEntry, ...]
    epoch_budget: int

    def entry_for(self, cluster_a: int, cluster_b: int) -> PlanEntry:
        key = (min(cluster_a, cluster_b), max(cluster_a, cluster_b))
        for e in self.entries:
            if (e.cluster_a, e.cluster_b) == key:
                return e
        raise KeyError(f"no plan entry for cluster pair {key}")


def _bisect_rising(f: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """First point with f >= 0, given f(lo) < 0 <= f(hi), to within tol."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def _bisect_falling(f: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Last point with f >= 0, given f(lo) >= 0 > f(hi), to within tol."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def _chunk_grids(t0_s: float, t1_s: float, step_s: float) -> Iterable[np.ndarray]:
    """Yield the scan grid over [t0, t1] in bounded chunks, t1 included."""
    n_steps = int(math.floor((t1_s - t0_s) / step_s))
    times = t0_s + step_s * np.arange(n_steps + 1)
    if times[-1] < t1_s:
        times = np.append(times, t1_s)
    for lo in range(0, len(times), _CHUNK_POINTS):
        yield times[lo : lo + _CHUNK_POINTS]


class _RunTracker:
    """Turns a chunked boolean visibility stream into refined windows."""

    def __init__(
        self,
        signed: Callable[[float], float],
        t0_s: float,
        t1_s: float,
        tol_s: float,
    ) -> None:
        self.signed = signed
        self.t0 = t0_s
        self.t1 = t1_s
        self.tol = tol_s
        self.open_start: float | None = None
        self.prev_t: float | None = None
        self.prev_ok = False
        self.intervals: list[tuple[float, float]] = []

    def feed(self, times: np.ndarray, ok: np.ndarray) -> None:
        for t, good in zip(times, ok):
            t = float(t)
            if good and self.open_start is None:
                if self.prev_t is None:
                    self.open_start = self.t0
                else:
                    self.open_start = _bisect_rising(self.signed, self.prev_t, t, self.tol)
            elif not good and self.open_start is not None:
                assert self.prev_t is not None
                end = _bisect_falling(self.signed, self.prev_t, t, self.tol)
                if end > self.open_start:
                    self.intervals.append((self.open_start, end))
                self.open_start = None
            self.prev_t = t
            self.prev_ok = bool(good)

    def finish(self) -> list[tuple[float, float]]:
        if self.open_start is not None and self.t1 > self.open_start:
            self.intervals.append((self.open_start, self.t1))
        return self.intervals


def compute_access_windows(
    constellation: Constellation,
    stations: Sequence[GroundStation],
    t0_s: float,
    t1_s: float,
    *,
    scan_step_s: float = SCAN_STEP_S,
    refine_tol_s: float = REFINE_TOL_S,
) -> list[ContactWindow]:
    """Find all satellite-to-station visibility windows in [t0, t1].

    Visibility means elevation at or above the station's own mask. An empty
    station list gives an empty result.

    Returns:
        Windows sorted by (start, satellite, station); windows of one pair
        are disjoint.
    """
    if t1_s <= t0_s:
        raise ValueError(f"need t1 > t0, got [{t0_s}, {t1_s}]")
    if not stations:
        return []

    trackers: dict[tuple[int, int], _RunTracker] = {}
    for sid, orbit in enumerate(constellation.orbits):
        for gid, st in enumerate(stations):

            def signed(t: float, _orbit: OrbitState = orbit, _st: GroundStation = st) -> float:
                return elevation_deg(propagate(_orbit, t), ground_position(_st, t)) - _st.min_elevation_deg

            trackers[(sid, gid)] = _RunTracker(signed, t0_s, t1_s, refine_tol_s)

    for grid in _chunk_grids(t0_s, t1_s, scan_step_s):
        sat_pos = [propagate_many(orbit, grid) for orbit in constellation.orbits]
        st_pos = [ground_position_many(st, grid) for st in stations]
        for (sid, gid), tracker in trackers.items():
            el = elevation_deg_many(sat_pos[sid], st_pos[gid])
            tracker.feed(grid, el >= stations[gid].min_elevation_deg)

    windows = []
    for (sid, gid), tracker in trackers.items():
        for start, end in tracker.finish():
            windows.append(ContactWindow(SAT_GS, sid, gid, start, end))
    windows.sort(key=lambda w: (w.start_s, w.a, w.b))
    return windows


def _ring_pairs(sats_per_cluster: int) -> list[tuple[int, int]]:
    # Adjacent offsets within one plane; a 2-ring is the single pair (0, 1).
    if sats_per_cluster < 2:
        return []
    if sats_per_cluster == 2:
        return [(0, 1)]
    return [(j, (j + 1) % sats_per_cluster) for j in range(sats_per_cluster)]


def compute_isl_windows(
    constellation: Constellation,
    t0_s: float,
    t1_s: float,
    *,
    grazing_radius_km: float | None = None,
    kinds: Sequence[str] = (INTRA_SL, INTER_SL),
    scan_step_s: float = SCAN_STEP_S,
    refine_tol_s: float = REFINE_TOL_S,
) -> list[ContactWindow]:
    """Find inter-satellite link windows in [t0, t1].

    Intra-plane neighbours keep a fixed relative geometry on a shared circular
    orbit, so their chord clearance a*cos(pi/S) is constant: the window is
    either the whole interval or absent, no scanning required. Cross-plane
    pairs are scanned like access windows, against the grazing sphere.

    Args:
        constellation: Satellites, cluster-major ids.
        t0_s: Interval start.
        t1_s: Interval end, > t0_s.
        grazing_radius_km: LOS obstruction radius; defaults to the Earth
            radius plus a 100 km atmospheric margin.
        kinds: Which window kinds to compute, subset of {intra-sl, inter-sl}.

    Returns:
        Windows sorted by (start, a, b).
    """
    if t1_s <= t0_s:
        raise ValueError(f"need t1 > t0, got [{t0_s}, {t1_s}]")
    graze = EARTH_RADIUS_KM + ISL_GRAZING_MARGIN_KM if grazing_radius_km is None else grazing_radius_km
    windows: list[ContactWindow] = []
    S = constellation.sats_per_cluster

    if INTRA_SL in kinds and S >= 2:
        clearance = orbital_radius_km(constellation.altitude_km) * math.cos(math.pi / S)
        if clearance >= graze:
            for c in range(constellation.num_clusters):
                base = c * S
                for j, k in _ring_pairs(S):
                    windows.append(ContactWindow(INTRA_SL, base + j, base + k, t0_s, t1_s))

    if INTER_SL in kinds and constellation.num_clusters >= 2:
        pairs = []
        for ca in range(constellation.num_clusters):
            for cb in range(ca + 1, constellation.num_clusters):
                for i in constellation.cluster_members(ca):
                    for j in constellation.cluster_members(cb):
                        pairs.append((i, j))

        trackers = {}
        for i, j in pairs:
            oi, oj = constellation.orbits[i], constellation.orbits[j]

            def signed(t: float, _oi: OrbitState = oi, _oj: OrbitState = oj) -> float:
                return segment_clearance_km(propagate(_oi, t), propagate(_oj, t)) - graze

            trackers[(i, j)] = _RunTracker(signed, t0_s, t1_s, refine_tol_s)

        for grid in _chunk_grids(t0_s, t1_s, scan_step_s):
            pos = [propagate_many(orbit, grid) for orbit in constellation.orbits]
            for (i, j), tracker in trackers.items():
                clr = segment_clearance_many(pos[i], pos[j])
                tracker.feed(grid, clr >= graze)

        for (i, j), tracker in trackers.items():
            for start, end in tracker.finish():
                windows.append(ContactWindow(INTER_SL, i, j, start, end))

    windows.sort(key=lambda w: (w.start_s, w.a, w.b))
    return windows


def min_ring_size(altitude_km: float, margin_km: float = ISL_GRAZING_MARGIN_KM) -> int:
    """Smallest satellite count whose intra-plane ring never loses LOS.

    Adjacent satellites of an N-ring sit 360/N degrees apart on a circle of
    radius a, so the chord between them passes within a*cos(pi/N) of the
    Earth center; the ring is persistent when that clearance stays at or
    above R_earth + margin.

    Raises:
        ValueError: If the altitude is not positive, or the margin is so
            large that no ring can clear it.
    """
    if altitude_km <= 0:
        raise ValueError(f"altitude_km must be positive, got {altitude_km}")
    a = orbital_radius_km(altitude_km)
    target = EARTH_RADIUS_KM + margin_km
    if a <= target:
        raise ValueError(f"no ring clears margin {margin_km} km at altitude {altitude_km} km")
    n = 2
    while a * math.cos(math.pi / n) < target:
        n += 1
    return n


def inter_plane_window_length(
    alpha_deg: float,
    altitude_km: float,
    phase_offset_deg: float = 0.0,
    *,
    grazing_margin_km: float = 0.0,
    scan_step_s: float = 1.0,
    refine_tol_s: float = REFINE_TOL_S,
) -> float:
    """Longest contiguous LOS interval between satellites on crossing planes.

    Both satellites fly the same circular altitude on polar planes whose
    ascending nodes differ by alpha (for polar planes the node offset equals
    the plane angle). phase_offset_deg shifts the second satellite along its
    orbit; zero means matched phasing. When LOS never drops over a full
    period, the period itself is returned.

    The default grazing margin is zero (bare Earth horizon); pass a margin
    to require extra clearance.

    Raises:
        ValueError: If alpha is outside [0, 180] or the altitude is not
            positive.
    """
    if not 0.0 <= alpha_deg <= 180.0:
        raise ValueError(f"alpha_deg must be in [0, 180], got {alpha_deg}")
    if altitude_km <= 0:
        raise ValueError(f"altitude_km must be positive, got {altitude_km}")
    period = orbital_period_s(altitude_km)
    graze = EARTH_RADIUS_KM + grazing_margin_km
    orbit_a = OrbitState(altitude_km, 90.0, 0.0, 0.0)
    orbit_b = OrbitState(altitude_km, 90.0, alpha_deg, phase_offset_deg)

    # Two periods of samples: the relative geometry repeats every period, so
    # any non-persistent window appears unclipped somewhere in the span.
    times = np.arange(0.0, 2.0 * period + scan_step_s, scan_step_s)
    clr = segment_clearance_many(propagate_many(orbit_a, times), propagate_many(orbit_b, times))
    ok = clr >= graze
    if ok.all():
        return period

    def signed(t: float) -> float:
        return segment_clearance_km(propagate(orbit_a, t), propagate(orbit_b, t)) - graze

    best = 0.0
    i = 0
    n = len(ok)
    while i < n:
        if ok[i]:
            j = i
            while j + 1 < n and ok[j + 1]:
                j += 1
            start = float(times[i])
            end = float(times[j])
            if i > 0:
                start = _bisect_rising(signed, float(times[i - 1]), start, refine_tol_s)
            if j + 1 < n:
                end = _bisect_falling(signed, end, float(times[j + 1]), refine_tol_s)
            best = max(best, end - start)
            i = j + 1
        else:
            i += 1
    return min(best, period)


def contact_events(
    windows: Iterable[ContactWindow],
    t_s: float,
    kinds: Sequence[str] = (SAT_GS,),
) -> list[tuple[float, ContactWindow]]:
    """Contact events at or after t: window starts, or t for ongoing windows.

    Sorted by (time, satellite, peer) so downstream tie-breaking is uniform.
    """
    events = []
    for w in windows:
        if w.kind not in kinds or w.end_s <= t_s:
            continue
        events.append((max(w.start_s, t_s), w))
    events.sort(key=lambda e: (e[0], e[1].a, e[1].b))
    return events


def _isl_connected(
    sat_a: int,
    sat_b: int,
    t_s: float,
    isl_windows: Sequence[ContactWindow],
) -> bool:
    """True if an intra-plane link path joins the two satellites at time t."""
    if sat_a == sat_b:
        return True
    adj: dict[int, set[int]] = {}
    for w in isl_windows:
        if w.kind == INTRA_SL and w.start_s <= t_s <= w.end_s:
            adj.setdefault(w.a, set()).add(w.b)
            adj.setdefault(w.b, set()).add(w.a)
    frontier = [sat_a]
    seen = {sat_a}
    while frontier:
        cur = frontier.pop()
        for nxt in adj.get(cur, ()):
            if nxt == sat_b:
                return True
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return False


def _schedule(
    windows: Sequence[ContactWindow],
    count: int,
    t_s: float,
    constellation: Constellation | None,
) -> list[ScheduleEntry]:
    """Shared engine behind fl_schedule and intra_sl_schedule.

    Walks ground contacts forward in time. A satellite becomes eligible at
    its second own contact (direct return), or, when relaying is enabled and
    plane links connect it to a satellite currently at a station, at the
    first peer contact after its own dispatch contact. Direct returns win
    time ties.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    relay = constellation is not None
    events = contact_events(windows, t_s)
    isl = [w for w in windows if w.kind == INTRA_SL] if relay else []

    first_contact: dict[int, float] = {}
    contact_counts: dict[int, int] = {}
    eligible: dict[int, ScheduleEntry] = {}

    for i, (te, w) in enumerate(events):
        k = w.a
        contact_counts[k] = contact_counts.get(k, 0) + 1
        if contact_counts[k] == 2:
            prior = eligible.get(k)
            # Direct return; takes priority over a relay found at the same time.
            if prior is None or (prior.relayed and prior.return_s == te):
                eligible[k] = ScheduleEntry(k, first_contact[k], te, w.b, relayed=False)
        if relay:
            assert constellation is not None
            for peer in constellation.cluster_members(constellation.cluster_of(k)):
                if peer == k or peer in eligible or peer not in first_contact:
                    continue
                if first_contact[peer] < te and _isl_connected(peer, k, te, isl):
                    eligible[peer] = ScheduleEntry(peer, first_contact[peer], te, k, relayed=True)
        if k not in first_contact:
            first_contact[k] = te
        # Stop only at a timestamp boundary so same-instant direct
        # contacts can still upgrade relay entries.
        if len(eligible) >= count and (i + 1 == len(events) or events[i + 1][0] > te):
            break

    if len(eligible) < count:
        raise SchedulingHorizonExhausted(
            f"only {len(eligible)} of {count} clients eligible within the window horizon"
        )
    chosen = sorted(eligible.values(), key=lambda e: (e.return_s, e.satellite))[:count]
    return chosen


def fl_schedule(windows: Sequence[ContactWindow], count: int, t_s: float) -> list[ScheduleEntry]:
    """Pick the clients that finish a contact-and-return pattern soonest.

    Simulating forward from t, a satellite becomes eligible at its second
    ground contact after t (first contact receives the model, second returns
    it). The first `count` distinct satellites to become eligible are
    returned, ordered by eligibility time; ties go to the lower satellite
    id, and simultaneous windows of one satellite to the lower station id.

    Raises:
        SchedulingHorizonExhausted: If fewer than `count` satellites become
            eligible before the window list runs out.
    """
    return _schedule(windows, count, t_s, None)


def intra_sl_schedule(
    windows: Sequence[ContactWindow],
    constellation: Constellation,
    count: int,
    t_s: float,
) -> list[ScheduleEntry]:
    """fl_schedule with intra-plane relays as extra return opportunities.

    A satellite that has already received the model (passed a station once)
    also becomes eligible when any same-plane satellite it can reach over
    intra-plane links is at a station: that peer relays the parameters back.
    Direct returns are preferred when both happen at the same instant. With
    no intra-plane windows in the input this reduces to fl_schedule.
    """
    return _schedule(windows, count, t_s, constellation)


def inter_sl_scheduler(
    constellation: Constellation,
    windows: Sequence[ContactWindow],
    t_s: float,
    payload_bytes: int,
    data_rate_bytes_per_s: float,
    epoch_duration_s: float,
) -> ClusterConnectionPlan:
    """Plan one cross-plane exchange per unordered cluster pair.

    Walks cross-plane windows forward from t. A window is feasible when the
    payload fits between the effective contact time max(start, t) and the
    window end. The first feasible window of an uncovered pair is adopted;
    afterwards a pair's entry may be replaced by a later feasible window as
    long as that window still completes no later than the plan's current
    bottleneck, which consolidates exchanges without stretching the plan.
    Planning stops once all (C-1)*C/2 pairs are covered.

    The epoch budget is how many local epochs of the given duration fit
    between the first and last planned contact, never less than one.

    Raises:
        ValueError: For bad rates, durations, or a single-cluster
            constellation.
        SchedulingHorizonExhausted: If some pair never gets a feasible
            window before the list ends.
    """
    if constellation.num_clusters < 2:
        raise ValueError("cross-plane planning needs at least two clusters")
    if data_rate_bytes_per_s <= 0:
        raise ValueError(f"data rate must be positive, got {data_rate_bytes_per_s}")
    if epoch_duration_s <= 0:
        raise ValueError(f"epoch duration must be positive, got {epoch_duration_s}")
    tx_s = payload_bytes / data_rate_bytes_per_s
    c = constellation.num_clusters
    wanted = c * (c - 1) // 2

    plan: dict[tuple[int, int], PlanEntry] = {}
    events = contact_events(windows, t_s, kinds=(INTER_SL,))
    for i, (te, w) in enumerate(events):
        # Stop at a timestamp boundary so simultaneous windows can still
        # consolidate a just-covered pair.
        if len(plan) == wanted and te > max(e.contact_s for e in plan.values()):
            break
        if te + tx_s > w.end_s:
            continue
        ca = constellation.cluster_of(w.a)
        cb = constellation.cluster_of(w.b)
        if ca == cb:
            continue
        key = (min(ca, cb), max(ca, cb))
        entry = PlanEntry(key[0], key[1], w.a, w.b, w, te, te + tx_s)
        if key not in plan:
            plan[key] = entry
        else:
            latest = max(e.completion_s for e in plan.values())
            if entry.completion_s <= latest:
                plan[key] = entry

    if len(plan) < wanted:
        raise SchedulingHorizonExhausted(
            f"{len(plan)} of {wanted} cluster pairs connected within the window horizon"
        )
    entries = tuple(sorted(plan.values(), key=lambda e: (e.contact_s, e.cluster_a, e.cluster_b)))
    first = entries[0].contact_s
    last = entries[-1].contact_s
    budget = max(1, int(math.floor((last - first) / epoch_duration_s)))
    return ClusterConnectionPlan(entries=entries, epoch_budget=budget)


def windows_to_csv(windows: Iterable[ContactWindow], path) -> None:
    """Write windows as CSV with columns kind,a,b,start_s,end_s."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["kind", "a", "b", "start_s", "end_s"])
        for w in windows:
            writer.writerow([w.kind, w.a, w.b, repr(w.start_s), repr(w.end_s)])


def read_windows_csv(path) -> list[ContactWindow]:
    """Read back a windows CSV produced by windows_to_csv."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append(
                ContactWindow(
                    kind=row["kind"],
                    a=int(row["a"]),
                    b=int(row["b"]),
                    start_s=float(row["start_s"]),
                    end_s=float(row["end_s"]),
                )
            )
    return out
