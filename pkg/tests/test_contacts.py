"""Window computation and scheduler checks.

Window boundaries are validated against dense 0.1 s brute-force scans and
closed-form geometry; scheduler behavior against hand-traced window sets.
"""

import math

import numpy as np
import pytest

from orbitfl.constants import EARTH_RADIUS_KM, orbital_period_s, orbital_radius_km
from orbitfl.contacts import (
    INTER_SL,
    INTRA_SL,
    SAT_GS,
    ContactWindow,
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
from orbitfl.orbital import (
    GroundStation,
    build_walker_star,
    elevation_deg_many,
    ground_position_many,
    propagate_many,
    segment_clearance_many,
)


def gs_window(sat, station, start, end):
    return ContactWindow(SAT_GS, sat, station, start, end)


# ---------------------------------------------------------------- windows


def test_contact_window_validation():
    with pytest.raises(ValueError):
        ContactWindow(SAT_GS, 0, 1, 10.0, 10.0)
    w = gs_window(0, 100, 5.0, 25.0)
    assert w.duration_s == pytest.approx(20.0)


def test_access_windows_match_dense_scan():
    cons = build_walker_star(1, 1, altitude_km=500.0)
    station = GroundStation("mid", 43.55, -96.73)
    t1 = 86400.0
    windows = compute_access_windows(cons, [station], 0.0, t1)
    assert windows, "a polar satellite must pass a mid-latitude station daily"

    grid = np.arange(0.0, t1 + 0.1, 0.1)
    sat = propagate_many(cons.orbits[0], grid)
    gs = ground_position_many(station, grid)
    above = elevation_deg_many(sat, gs) >= station.min_elevation_deg
    edges = np.flatnonzero(np.diff(above.astype(int)))
    rises = grid[edges[above[edges + 1]] + 1]
    sets_ = grid[edges[~above[edges + 1]] + 1]
    assert len(windows) == len(rises) == len(sets_)
    for w, r, s in zip(windows, rises, sets_):
        assert w.start_s == pytest.approx(r, abs=0.2)
        assert w.end_s == pytest.approx(s, abs=0.2)
        assert w.kind == SAT_GS and w.a == 0 and w.b == 0


def test_access_windows_respect_elevation_mask():
    cons = build_walker_star(1, 1, altitude_km=500.0)
    station = GroundStation("mid", 43.55, -96.73, min_elevation_deg=10.0)
    low_mask = GroundStation("mid", 43.55, -96.73, min_elevation_deg=0.0)
    strict = compute_access_windows(cons, [station], 0.0, 43200.0)
    loose = compute_access_windows(cons, [low_mask], 0.0, 43200.0)
    assert sum(w.duration_s for w in loose) > sum(w.duration_s for w in strict)


def test_access_windows_multiple_pairs_sorted():
    cons = build_walker_star(2, 2, altitude_km=500.0)
    stations = [GroundStation("a", 43.55, -96.73), GroundStation("b", -31.42, -64.18)]
    windows = compute_access_windows(cons, stations, 0.0, 21600.0)
    keys = [(w.start_s, w.a, w.b) for w in windows]
    assert keys == sorted(keys)
    assert {w.b for w in windows} <= {0, 1}


def test_intra_ring_persistence_threshold_at_500km():
    # Adjacent-neighbor chord clearance is constant: a*cos(pi/S).
    # a=6871: S=10 -> 6534.7 km >= 6471 (persistent), S=9 -> 6456.6 (broken).
    ten = build_walker_star(1, 10, altitude_km=500.0)
    windows = compute_isl_windows(ten, 0.0, 10000.0, kinds=(INTRA_SL,))
    assert len(windows) == 10  # one full-span window per ring pair
    assert all(w.start_s == 0.0 and w.end_s == 10000.0 for w in windows)
    pairs = {(w.a, w.b) for w in windows}
    assert (0, 1) in pairs and (9, 0) in pairs

    nine = build_walker_star(1, 9, altitude_km=500.0)
    assert compute_isl_windows(nine, 0.0, 10000.0, kinds=(INTRA_SL,)) == []


def test_intra_ring_two_satellites_single_pair():
    cons = build_walker_star(1, 2, altitude_km=500.0)
    # Opposite satellites: chord through the Earth, never linked.
    assert compute_isl_windows(cons, 0.0, 1000.0, kinds=(INTRA_SL,)) == []


def test_min_ring_size_oracle_values():
    assert min_ring_size(500.0, 100.0) == 10
    assert min_ring_size(500.0, 0.0) == 9
    assert min_ring_size(400.0, 100.0) == 11
    assert min_ring_size(500.0) == 10  # default margin


def test_min_ring_size_validation():
    with pytest.raises(ValueError):
        min_ring_size(0.0)
    with pytest.raises(ValueError):
        min_ring_size(500.0, margin_km=10000.0)


def test_inter_windows_match_dense_scan():
    cons = build_walker_star(2, 1, altitude_km=500.0)
    period = orbital_period_s(500.0)
    windows = compute_isl_windows(cons, 0.0, period, kinds=(INTER_SL,))
    assert windows, "perpendicular polar planes meet near the poles every orbit"

    grid = np.arange(0.0, period + 0.1, 0.1)
    p1 = propagate_many(cons.orbits[0], grid)
    p2 = propagate_many(cons.orbits[1], grid)
    clear = segment_clearance_many(p1, p2) >= EARTH_RADIUS_KM + 100.0
    edges = np.flatnonzero(np.diff(clear.astype(int)))
    starts = list(grid[edges[clear[edges + 1]] + 1])
    ends = list(grid[edges[~clear[edges + 1]] + 1])
    if clear[0]:
        starts = [0.0] + starts
    if clear[-1]:
        ends = ends + [period]
    assert len(windows) == len(starts)
    for w, r, s in zip(windows, starts, ends):
        assert w.start_s == pytest.approx(r, abs=0.2)
        assert w.end_s == pytest.approx(s, abs=0.2)


def test_inter_plane_window_length_persistent_below_threshold():
    # Bare-Earth grazing at 400 km blocks LOS once the equator-crossing
    # separation exceeds 2*acos(R/a) = 39.57 deg.
    period = orbital_period_s(400.0)
    assert inter_plane_window_length(0.0, 400.0) == pytest.approx(period, abs=0.2)
    assert inter_plane_window_length(39.0, 400.0) == pytest.approx(period, abs=0.2)
    assert inter_plane_window_length(40.0, 400.0) < period


def test_inter_plane_window_length_matches_closed_form():
    # Same-phase satellites in planes split by alpha: separation angle g
    # follows cos g = 1 - cos^2(u) (1 - cos alpha), and LOS holds while
    # g <= 2 acos(R/a). Solving for the anomaly u gives the run length.
    alpha = 60.0
    a = orbital_radius_km(400.0)
    period = orbital_period_s(400.0)
    cos_g_max = 2.0 * (EARTH_RADIUS_KM / a) ** 2 - 1.0
    cos_u_edge = math.sqrt((1.0 - cos_g_max) / (1.0 - math.cos(math.radians(alpha))))
    expected = period * (math.pi - 2.0 * math.acos(cos_u_edge)) / (2.0 * math.pi)
    got = inter_plane_window_length(alpha, 400.0)
    assert got == pytest.approx(expected, abs=2.0)


def test_inter_plane_window_length_validation():
    with pytest.raises(ValueError):
        inter_plane_window_length(-1.0, 400.0)
    with pytest.raises(ValueError):
        inter_plane_window_length(181.0, 400.0)
    with pytest.raises(ValueError):
        inter_plane_window_length(30.0, 0.0)


# ---------------------------------------------------------------- events


def test_contact_events_clamp_and_order():
    windows = [
        gs_window(1, 100, 0.0, 10.0),
        gs_window(0, 100, 5.0, 15.0),
        gs_window(2, 100, 3.0, 4.0),  # already over at t=4
        ContactWindow(INTRA_SL, 0, 1, 0.0, 50.0),  # filtered by kind
    ]
    events = contact_events(windows, 4.0)
    assert [(t, w.a) for t, w in events] == [(4.0, 1), (5.0, 0)]


def test_contact_events_tie_breaks_by_ids():
    windows = [
        gs_window(1, 101, 10.0, 20.0),
        gs_window(1, 100, 10.0, 20.0),
        gs_window(0, 100, 10.0, 20.0),
    ]
    order = [(w.a, w.b) for _, w in contact_events(windows, 0.0)]
    assert order == [(0, 100), (1, 100), (1, 101)]


# ------------------------------------------------------------- fl_schedule


def test_fl_schedule_orders_by_second_contact():
    windows = [
        gs_window(0, 100, 0.0, 10.0),
        gs_window(1, 100, 5.0, 15.0),
        gs_window(2, 100, 8.0, 18.0),
        gs_window(1, 101, 20.0, 30.0),
        gs_window(0, 100, 50.0, 60.0),
        gs_window(2, 101, 90.0, 100.0),
    ]
    picked = fl_schedule(windows, 2, 0.0)
    assert [(e.satellite, e.first_contact_s, e.return_s) for e in picked] == [
        (1, 5.0, 20.0),
        (0, 0.0, 50.0),
    ]
    assert picked[0].via == 101 and not picked[0].relayed


def test_fl_schedule_counts_ongoing_window_at_t():
    windows = [
        gs_window(0, 100, 0.0, 10.0),
        gs_window(0, 101, 12.0, 22.0),
    ]
    picked = fl_schedule(windows, 1, 2.0)
    assert picked[0].first_contact_s == 2.0
    assert picked[0].return_s == 12.0


def test_fl_schedule_raises_when_short():
    windows = [gs_window(0, 100, 0.0, 10.0)]
    with pytest.raises(SchedulingHorizonExhausted):
        fl_schedule(windows, 1, 0.0)


def test_fl_schedule_ignores_windows_before_t():
    windows = [
        gs_window(0, 100, 0.0, 10.0),
        gs_window(0, 100, 20.0, 30.0),
        gs_window(0, 100, 40.0, 50.0),
    ]
    picked = fl_schedule(windows, 1, 15.0)
    assert picked[0].first_contact_s == 20.0
    assert picked[0].return_s == 40.0


# ------------------------------------------------------- intra_sl_schedule


def ring_pair_constellation():
    return build_walker_star(1, 2, altitude_km=500.0)


def full_ring(horizon=1000.0):
    return ContactWindow(INTRA_SL, 0, 1, 0.0, horizon)


def test_intra_schedule_relays_through_peer():
    cons = ring_pair_constellation()
    windows = [
        full_ring(),
        gs_window(0, 100, 0.0, 10.0),
        gs_window(1, 100, 20.0, 30.0),
        gs_window(0, 100, 200.0, 210.0),
    ]
    picked = intra_sl_schedule(windows, cons, 1, 0.0)
    entry = picked[0]
    assert entry.satellite == 0
    assert entry.return_s == 20.0  # peer 1 reaches the station first
    assert entry.relayed and entry.via == 1


def test_intra_schedule_prefers_direct_on_tie():
    cons = ring_pair_constellation()
    windows = [
        full_ring(),
        gs_window(1, 100, 5.0, 15.0),
        gs_window(0, 100, 20.0, 30.0),
        gs_window(1, 101, 20.0, 30.0),
    ]
    picked = intra_sl_schedule(windows, cons, 1, 0.0)
    entry = picked[0]
    assert entry.satellite == 1
    assert entry.return_s == 20.0
    assert not entry.relayed and entry.via == 101


def test_intra_schedule_without_links_matches_plain():
    cons = ring_pair_constellation()
    windows = [
        gs_window(0, 100, 0.0, 10.0),
        gs_window(1, 100, 5.0, 15.0),
        gs_window(0, 101, 30.0, 40.0),
        gs_window(1, 101, 50.0, 60.0),
    ]
    assert intra_sl_schedule(windows, cons, 2, 0.0) == fl_schedule(windows, 2, 0.0)


def test_intra_schedule_any_peer_pass_can_relay():
    cons = ring_pair_constellation()
    # Satellite 1 got the model at 0; satellite 0's own first pass at 20
    # doubles as satellite 1's relay opportunity.
    windows = [
        full_ring(),
        gs_window(1, 100, 0.0, 10.0),
        gs_window(0, 100, 20.0, 30.0),
        gs_window(1, 101, 40.0, 50.0),
    ]
    picked = intra_sl_schedule(windows, cons, 1, 0.0)
    assert picked[0] == ScheduleEntry(1, 0.0, 20.0, 0, relayed=True)


def test_intra_schedule_relay_requires_prior_dispatch():
    cons = ring_pair_constellation()
    # Satellite 1 never passes a station, so it has nothing to send back;
    # satellite 0 needs two contacts of its own.
    windows = [
        full_ring(),
        gs_window(0, 100, 20.0, 30.0),
        gs_window(0, 101, 40.0, 50.0),
    ]
    picked = intra_sl_schedule(windows, cons, 1, 0.0)
    assert picked[0].satellite == 0
    assert picked[0].return_s == 40.0
    assert not picked[0].relayed


# ------------------------------------------------------ inter_sl_scheduler


def inter_window(a, b, start, end):
    return ContactWindow(INTER_SL, a, b, start, end)


def test_inter_scheduler_single_pair_plan():
    cons = build_walker_star(2, 1, altitude_km=500.0)
    windows = [inter_window(0, 1, 10.0, 20.0), inter_window(0, 1, 30.0, 50.0)]
    plan = inter_sl_scheduler(cons, windows, 0.0, payload_bytes=40, data_rate_bytes_per_s=4.0, epoch_duration_s=5.0)
    assert len(plan.entries) == 1
    entry = plan.entry_for(0, 1)
    assert entry.contact_s == 10.0 and entry.completion_s == 20.0
    assert plan.epoch_budget == 1


def test_inter_scheduler_skips_too_short_window():
    cons = build_walker_star(2, 1, altitude_km=500.0)
    windows = [inter_window(0, 1, 10.0, 15.0), inter_window(0, 1, 30.0, 50.0)]
    plan = inter_sl_scheduler(cons, windows, 0.0, 40, 4.0, 5.0)
    assert plan.entry_for(0, 1).contact_s == 30.0


def test_inter_scheduler_covers_every_pair_with_budget():
    cons = build_walker_star(3, 1, altitude_km=500.0)
    windows = [
        inter_window(0, 1, 0.0, 100.0),
        inter_window(0, 2, 40.0, 60.0),
        inter_window(1, 2, 50.0, 200.0),
    ]
    plan = inter_sl_scheduler(cons, windows, 0.0, 40, 4.0, 7.0)
    assert len(plan.entries) == 3
    assert [e.contact_s for e in plan.entries] == [0.0, 40.0, 50.0]
    assert plan.epoch_budget == 7  # floor((50-0)/7)


def test_inter_scheduler_consolidates_simultaneous_windows():
    # Two satellite pairs of the same cluster pair meet at once; the later
    # event in id order takes the slot because it completes no later.
    cons = build_walker_star(2, 2, altitude_km=500.0)
    windows = [
        inter_window(0, 2, 0.0, 100.0),
        inter_window(1, 3, 0.0, 50.0),
    ]
    plan = inter_sl_scheduler(cons, windows, 0.0, 40, 4.0, 1.0)
    entry = plan.entry_for(0, 1)
    assert (entry.sat_a, entry.sat_b) == (1, 3)
    assert entry.contact_s == 0.0


def test_inter_scheduler_validation_and_exhaustion():
    two = build_walker_star(2, 1, altitude_km=500.0)
    one = build_walker_star(1, 2, altitude_km=500.0)
    with pytest.raises(ValueError):
        inter_sl_scheduler(one, [], 0.0, 40, 4.0, 5.0)
    with pytest.raises(ValueError):
        inter_sl_scheduler(two, [], 0.0, 40, 0.0, 5.0)
    with pytest.raises(ValueError):
        inter_sl_scheduler(two, [], 0.0, 40, 4.0, 0.0)
    with pytest.raises(SchedulingHorizonExhausted):
        inter_sl_scheduler(two, [inter_window(0, 1, 0.0, 5.0)], 0.0, 40, 4.0, 5.0)


def test_inter_scheduler_entry_count_grows_quadratically():
    for c in (2, 3, 4):
        cons = build_walker_star(c, 1, altitude_km=500.0)
        windows = [
            inter_window(i, j, 10.0 * (i + j), 10.0 * (i + j) + 100.0)
            for i in range(c)
            for j in range(i + 1, c)
        ]
        plan = inter_sl_scheduler(cons, windows, 0.0, 40, 4.0, 5.0)
        assert len(plan.entries) == c * (c - 1) // 2


# ----------------------------------------------------------------- csv io


def test_windows_csv_roundtrip(tmp_path):
    windows = [
        gs_window(0, 100, 0.123456789, 10.987654321),
        ContactWindow(INTER_SL, 3, 7, 1e5 + 0.0625, 1e5 + 99.5),
    ]
    path = tmp_path / "windows.csv"
    windows_to_csv(windows, path)
    assert read_windows_csv(path) == sorted(windows, key=lambda w: (w.start_s, w.a, w.b))
    header = path.read_text().splitlines()[0]
    assert header == "kind,a,b,start_s,end_s"
