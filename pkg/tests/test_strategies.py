"""Protocol state machines driven by hand-built window lists.

Every scenario here uses a tiny 2-feature model and a link sized so one
transfer takes exactly 1 s, which keeps the hand-traced timings readable.
"""

import numpy as np
import pytest

from orbitfl.contacts import INTER_SL, INTRA_SL, SAT_GS, ContactWindow
from orbitfl.learning import (
    ClientDataset,
    ModelParams,
    TrainConfig,
    aggregate,
    evaluate,
    init_params,
    local_train,
    train_rng,
)
from orbitfl.orbital import build_walker_star
from orbitfl.simulation import CommModel
from orbitfl.strategies import (
    RunContext,
    StaticWindowProvider,
    StrategyConfig,
    run_strategy,
)

# 6 parameters (2 classes x 2 dims + biases) at 32 bits = 24 bytes, so a
# 24 B/s link moves one model in exactly 1 s.
COMM = CommModel(data_rate_bytes_per_s=24.0)


def gs(sat, start, end, station=0):
    return ContactWindow(SAT_GS, sat, station, float(start), float(end))


def intra(a, b, start, end):
    return ContactWindow(INTRA_SL, a, b, float(start), float(end))


def inter(a, b, start, end):
    return ContactWindow(INTER_SL, a, b, float(start), float(end))


def make_clients(n, samples=3):
    """n tiny single-class datasets plus a mixed test set."""
    rng = np.random.default_rng(17)
    clients = []
    for k in range(n):
        center = np.array([2.0, -2.0]) if k % 2 == 0 else np.array([-2.0, 2.0])
        feats = center + rng.normal(0.0, 0.3, size=(samples, 2))
        labels = np.full(samples, k % 2)
        clients.append(ClientDataset(feats, labels, client_id=k))
    tf = np.concatenate([[2.0, -2.0] + rng.normal(0, 0.3, (4, 2)), [-2.0, 2.0] + rng.normal(0, 0.3, (4, 2))])
    test = ClientDataset(tf, np.array([0] * 4 + [1] * 4))
    return clients, test


def make_ctx(windows, clients, test, strategy, train=None, constellation=None, **kw):
    provider = StaticWindowProvider(windows, constellation=constellation, **kw)
    return RunContext(
        provider=provider,
        strategy=strategy,
        train=train or TrainConfig(throughput_samples_per_s=1.0),
        comm=COMM,
        clients=clients,
        test_set=test,
        initial_params=init_params(2, 2),
        seed=0,
        max_rounds=3,
    )


def fedavg_oracle(clients, test, cfg, seed, rounds, epochs=None):
    """Classical synchronous FedAvg over all clients, no geometry."""
    g = init_params(2, 2)
    accs = []
    for r in range(rounds):
        ups = [
            local_train(
                ModelParams(values=g.values.copy(), round_tag=r),
                clients[i],
                cfg,
                train_rng(seed, r, i),
                epochs=epochs,
            )
            for i in range(len(clients))
        ]
        g = aggregate(ups)
        accs.append(evaluate(g, test))
    return accs


# ---------------------------------------------------------------- fedavg


def lockstep_windows():
    # Both satellites see a station over [0,10], [100,110], [200,210], ...
    out = []
    for k in range(4):
        out.append(gs(0, 100 * k, 100 * k + 10))
        out.append(gs(1, 100 * k, 100 * k + 10))
    return out


def test_fedavg_matches_classical_oracle_on_lockstep_windows():
    clients, test = make_clients(2)
    ctx = make_ctx(lockstep_windows(), clients, test, StrategyConfig(kind="fedavg"))
    out = run_strategy(ctx)
    assert len(out.records) == 3
    oracle = fedavg_oracle(clients, test, ctx.train, seed=0, rounds=3)
    got = [a for _, a in out.accuracy_trace]
    assert got == pytest.approx(oracle, rel=1e-12)


def test_fedavg_round_timing_and_phases():
    clients, test = make_clients(2)
    ctx = make_ctx(lockstep_windows(), clients, test, StrategyConfig(kind="fedavg"))
    out = run_strategy(ctx)
    r0 = out.records[0]
    # Download [0,1], train 3 s, upload [100,101] on the next pass.
    assert r0.start_s == pytest.approx(0.0)
    assert r0.end_s == pytest.approx(101.0)
    assert r0.participants == (0, 1)
    assert r0.comm_s == pytest.approx(2.0)
    assert r0.compute_s == pytest.approx(3.0)
    assert r0.idle_s == pytest.approx(96.0)
    # Round 2 re-enters the still-open second pass mid-window.
    r1 = out.records[1]
    assert r1.start_s == pytest.approx(101.0)
    assert r1.end_s == pytest.approx(201.0)


def test_fedavg_return_needs_a_distinct_window():
    # One long pass is not enough: the upload must ride a later pass even
    # though the first window could fit it.
    clients, test = make_clients(1)
    windows = [gs(0, 0, 30), gs(0, 50, 60)]
    ctx = make_ctx(windows, clients, test, StrategyConfig(kind="fedavg"))
    ctx.max_rounds = 1
    out = run_strategy(ctx)
    assert out.records[0].end_s == pytest.approx(51.0)
    assert ctx.timelines[0].occupancy(0.0, 30.0).comm_up_s == pytest.approx(0.0)


def test_fedavg_skips_windows_too_short_for_the_payload():
    clients, test = make_clients(1)
    windows = [gs(0, 0, 0.5), gs(0, 5, 10), gs(0, 50, 60)]
    ctx = make_ctx(windows, clients, test, StrategyConfig(kind="fedavg"))
    ctx.max_rounds = 1
    out = run_strategy(ctx)
    assert out.records[0].end_s == pytest.approx(51.0)
    tl = ctx.timelines[0]
    assert tl.occupancy(0.0, 5.0).comm_down_s == pytest.approx(0.0)
    assert tl.occupancy(5.0, 6.0).comm_down_s == pytest.approx(1.0)


def test_fedavg_incomplete_round_reported_honestly():
    clients, test = make_clients(1)
    ctx = make_ctx([gs(0, 0, 10)], clients, test, StrategyConfig(kind="fedavg"))
    out = run_strategy(ctx)
    assert out.round_incomplete
    assert out.records == []


def test_max_clients_per_round_caps_participation():
    clients, test = make_clients(3)
    windows = []
    for k in range(3):
        for sat in range(3):
            windows.append(gs(sat, 100 * k, 100 * k + 10))
    cfg = StrategyConfig(kind="fedavg", max_clients_per_round=2)
    ctx = make_ctx(windows, clients, test, cfg)
    ctx.max_rounds = 1
    out = run_strategy(ctx)
    assert out.records[0].participants == (0, 1)


# ---------------------------------------------------------------- fedprox


def test_fedprox_trains_through_the_whole_gap():
    clients, test = make_clients(1)
    windows = [gs(0, 0, 10), gs(0, 100, 110)]
    train = TrainConfig(throughput_samples_per_s=1.0, prox_mu=0.1)
    ctx = make_ctx(windows, clients, test, StrategyConfig(kind="fedprox"), train=train)
    ctx.max_rounds = 1
    out = run_strategy(ctx)
    # Download ends at 1, upload starts at 100: 99 s of compute, and
    # floor(99/3) = 33 epochs actually executed.
    assert out.records[0].compute_s == pytest.approx(99.0)
    oracle = fedavg_oracle(clients, test, train, seed=0, rounds=1, epochs=33)
    assert out.accuracy_trace[0][1] == pytest.approx(oracle[0], rel=1e-12)


def test_fedprox_gap_epochs_capped():
    clients, test = make_clients(1)
    windows = [gs(0, 0, 10), gs(0, 100, 110)]
    train = TrainConfig(throughput_samples_per_s=1.0, prox_mu=0.1, max_gap_epochs=5)
    ctx = make_ctx(windows, clients, test, StrategyConfig(kind="fedprox"), train=train)
    ctx.max_rounds = 1
    out = run_strategy(ctx)
    # Accounting still fills the gap; the executed math is capped.
    assert out.records[0].compute_s == pytest.approx(99.0)
    oracle = fedavg_oracle(clients, test, train, seed=0, rounds=1, epochs=5)
    assert out.accuracy_trace[0][1] == pytest.approx(oracle[0], rel=1e-12)


def test_schedule_v2_skips_returns_below_the_epoch_floor():
    clients, test = make_clients(1)
    windows = [gs(0, 0, 10), gs(0, 12, 20), gs(0, 100, 110)]
    # min_epochs=4 at 3 s per epoch needs a 12 s gap; the pass at 12 s
    # offers only 11 s after the download, so v2 waits for the next one.
    base = dict(throughput_samples_per_s=1.0, prox_mu=0.1)
    plain = make_ctx(
        windows, clients, test, StrategyConfig(kind="fedprox"), train=TrainConfig(**base)
    )
    plain.max_rounds = 1
    assert run_strategy(plain).records[0].end_s == pytest.approx(13.0)

    v2 = make_ctx(
        windows,
        clients,
        test,
        StrategyConfig(kind="fedprox", use_schedule_v2=True),
        train=TrainConfig(min_epochs=4, **base),
    )
    v2.max_rounds = 1
    assert run_strategy(v2).records[0].end_s == pytest.approx(101.0)


# ---------------------------------------------------------------- schedule


def test_schedule_selection_prefers_early_returners():
    # Sat 1 revisits quickly, sat 0 only once: the scheduled variant picks
    # sat 1, the unscheduled variant picks the numerically first contact.
    clients, test = make_clients(2)
    windows = [
        gs(0, 0, 10),
        gs(1, 2, 12),
        gs(1, 30, 40),
        gs(1, 70, 80),
        gs(0, 500, 510),
    ]
    cfg = StrategyConfig(kind="fedavg", use_schedule=True, max_clients_per_round=1)
    ctx = make_ctx(windows, clients, test, cfg)
    ctx.max_rounds = 1
    out = run_strategy(ctx)
    assert out.records[0].participants == (1,)
    assert out.records[0].end_s == pytest.approx(31.0)

    plain = make_ctx(windows, clients, test, StrategyConfig(kind="fedavg", max_clients_per_round=1))
    plain.max_rounds = 1
    assert run_strategy(plain).records[0].participants == (0,)


# ---------------------------------------------------------------- intra-SL


def ring3():
    return build_walker_star(num_clusters=1, sats_per_cluster=3, altitude_km=500.0)


def ring_windows(horizon=1000.0):
    return [intra(0, 1, 0, horizon), intra(1, 2, 0, horizon), intra(0, 2, 0, horizon)]


def test_intra_sl_relays_through_a_peer():
    clients, test = make_clients(3)
    windows = ring_windows() + [gs(0, 0, 10), gs(1, 50, 60), gs(2, 200, 210)]
    cfg = StrategyConfig(kind="fedavg", use_intra_sl=True, max_clients_per_round=1)
    ctx = make_ctx(
        windows, clients, test, cfg, constellation=ring3(), start_s=0.0, horizon_end_s=1000.0
    )
    ctx.max_rounds = 1
    out = run_strategy(ctx)
    rec = out.records[0]
    # Sat 0 trains, hands the update to sat 1 at 49, sat 1 uploads [50,51].
    assert rec.participants == (0,)
    assert rec.end_s == pytest.approx(51.0)
    assert ctx.timelines[0].occupancy(49.0, 50.0).comm_up_s == pytest.approx(1.0)
    assert ctx.timelines[1].occupancy(49.0, 50.0).comm_down_s == pytest.approx(1.0)
    assert ctx.timelines[1].occupancy(50.0, 51.0).comm_up_s == pytest.approx(1.0)


def test_intra_sl_prefers_direct_over_relay_on_ties():
    clients, test = make_clients(3)
    windows = ring_windows() + [gs(0, 0, 10), gs(0, 50, 60), gs(1, 50, 60)]
    cfg = StrategyConfig(kind="fedavg", use_intra_sl=True, max_clients_per_round=1)
    ctx = make_ctx(
        windows, clients, test, cfg, constellation=ring3(), start_s=0.0, horizon_end_s=1000.0
    )
    ctx.max_rounds = 1
    out = run_strategy(ctx)
    # Direct and relayed returns both complete at 51; direct wins.
    assert out.records[0].end_s == pytest.approx(51.0)
    assert ctx.timelines[0].occupancy(50.0, 51.0).comm_up_s == pytest.approx(1.0)
    assert ctx.timelines[1].occupancy(50.0, 51.0).comm_up_s == pytest.approx(0.0)


def test_intra_sl_without_persistent_ring_falls_back_to_direct():
    clients, test = make_clients(3)
    # Ring link (1,2) dies early, so no relay candidates exist.
    windows = [
        intra(0, 1, 0, 1000),
        intra(1, 2, 0, 400),
        intra(0, 2, 0, 1000),
        gs(0, 0, 10),
        gs(1, 50, 60),
        gs(0, 300, 310),
    ]
    cfg = StrategyConfig(kind="fedavg", use_intra_sl=True, max_clients_per_round=1)
    ctx = make_ctx(
        windows, clients, test, cfg, constellation=ring3(), start_s=0.0, horizon_end_s=1000.0
    )
    ctx.max_rounds = 1
    out = run_strategy(ctx)
    assert out.records[0].end_s == pytest.approx(301.0)
    assert ctx.timelines[1].occupancy(0.0, 1000.0).comm_up_s == pytest.approx(0.0)


# ---------------------------------------------------------------- fedbuff


def test_fedbuff_hand_traced_deposits():
    clients, test = make_clients(2, samples=4)
    clients = [clients[0], ClientDataset(clients[1].features[:4], clients[1].labels[:4], client_id=1)]
    # Sample counts 4 and 4; throughput 1 makes an epoch 4 s.
    windows = [gs(0, 0, 10), gs(1, 2, 12), gs(0, 30, 40), gs(1, 32, 42)]
    cfg = StrategyConfig(kind="fedbuff", buffer_size=1)
    ctx = make_ctx(windows, clients, test, cfg)
    ctx.max_rounds = 5
    out = run_strategy(ctx)
    assert len(out.records) == 2
    r0, r1 = out.records
    # Sat 0 downloads [0,1], trains to 30, uploads [30,31]: first round.
    assert (r0.start_s, r0.end_s, r0.participants) == (0.0, 31.0, (0,))
    # Sat 1 downloads [2,3], uploads [32,33]: second round.
    assert (r1.start_s, r1.end_s, r1.participants) == (31.0, 33.0, (1,))
    assert out.end_s == pytest.approx(33.0)
    # Each update trains floor(gap / 4) epochs on its own base model.
    g = init_params(2, 2)
    u0 = local_train(g.copy(), clients[0], ctx.train, train_rng(0, 1, 0), epochs=7)
    g1 = aggregate([u0])
    assert out.accuracy_trace[0][1] == pytest.approx(evaluate(g1, test), rel=1e-12)
    u1 = local_train(g.copy(), clients[1], ctx.train, train_rng(0, 1, 1), epochs=7)
    g2 = aggregate([u1])
    assert out.accuracy_trace[1][1] == pytest.approx(evaluate(g2, test), rel=1e-12)


def test_fedbuff_drops_stale_updates_without_filling_the_buffer():
    clients, test = make_clients(2)
    windows = [gs(0, 0, 10), gs(1, 2, 12), gs(0, 30, 40), gs(1, 32, 42)]
    cfg = StrategyConfig(kind="fedbuff", buffer_size=1, staleness_bound=0)
    ctx = make_ctx(windows, clients, test, cfg)
    ctx.max_rounds = 5
    out = run_strategy(ctx)
    # Sat 1's update is based on round 0 but lands after round 1 started:
    # staleness 1 exceeds the bound, so only one aggregation happens.
    assert len(out.records) == 1
    assert out.records[0].participants == (0,)


def test_fedbuff_keeps_training_through_short_passes():
    clients, test = make_clients(1)
    windows = [gs(0, 0, 10), gs(0, 20, 20.5), gs(0, 50, 60)]
    cfg = StrategyConfig(kind="fedbuff", buffer_size=1)
    ctx = make_ctx(windows, clients, test, cfg)
    ctx.max_rounds = 1
    out = run_strategy(ctx)
    # The 0.5 s pass cannot carry an upload; the deposit waits for t=50.
    assert len(out.records) == 1
    assert out.records[0].end_s == pytest.approx(51.0)


# ---------------------------------------------------------------- autoflsat


def grid22():
    return build_walker_star(num_clusters=2, sats_per_cluster=2, altitude_km=500.0)


def grid22_windows(horizon=10_000.0):
    return [
        intra(0, 1, 0, horizon),
        intra(2, 3, 0, horizon),
        inter(0, 2, 100, 2000),
    ]


def autoflsat_ctx(windows, clients, test, horizon=10_000.0, train=None):
    return make_ctx(
        windows,
        clients,
        test,
        StrategyConfig(kind="autoflsat"),
        train=train or TrainConfig(throughput_samples_per_s=1.0),
        constellation=grid22(),
        start_s=0.0,
        horizon_end_s=horizon,
    )


def test_autoflsat_hand_traced_round():
    clients, test = make_clients(4, samples=4)
    ctx = autoflsat_ctx(grid22_windows(), clients, test)
    ctx.max_rounds = 1
    out = run_strategy(ctx)
    rec = out.records[0]
    # Train [0,4], ring-accumulate [4,5], exchange waits for the window
    # at 100, [100,101], disseminate [101,102].
    assert rec.participants == (0, 1, 2, 3)
    assert rec.end_s == pytest.approx(102.0)
    assert ctx.timelines[0].occupancy(100.0, 101.0).comm_up_s == pytest.approx(1.0)
    assert ctx.timelines[2].occupancy(100.0, 101.0).comm_up_s == pytest.approx(1.0)
    # Cluster-weighted aggregate of per-cluster means matches by hand.
    g = init_params(2, 2)
    cfg = ctx.train
    c0 = aggregate(
        [local_train(g.copy(), clients[s], cfg, train_rng(0, 0, s), epochs=1) for s in (0, 1)]
    )
    c1 = aggregate(
        [local_train(g.copy(), clients[s], cfg, train_rng(0, 0, s), epochs=1) for s in (2, 3)]
    )
    expect = evaluate(aggregate([c0, c1]), test)
    assert out.accuracy_trace[0][1] == pytest.approx(expect, rel=1e-12)


def test_autoflsat_second_round_rides_the_open_window():
    clients, test = make_clients(4, samples=4)
    ctx = autoflsat_ctx(grid22_windows(), clients, test)
    ctx.max_rounds = 2
    out = run_strategy(ctx)
    # Round 2 starts at 102 with the exchange window still open, so the
    # whole round takes train 4 + three 1 s hops.
    assert out.records[1].start_s == pytest.approx(102.0)
    assert out.records[1].end_s == pytest.approx(109.0)


def test_autoflsat_needs_two_clusters():
    clients, test = make_clients(3)
    ctx = make_ctx(
        ring_windows(),
        clients,
        test,
        StrategyConfig(kind="autoflsat"),
        constellation=ring3(),
        start_s=0.0,
        horizon_end_s=1000.0,
    )
    with pytest.raises(ValueError, match="two clusters"):
        run_strategy(ctx)


def test_autoflsat_needs_persistent_rings():
    clients, test = make_clients(4)
    windows = [intra(0, 1, 0, 5000), intra(2, 3, 0, 10_000), inter(0, 2, 100, 2000)]
    ctx = autoflsat_ctx(windows, clients, test)
    with pytest.raises(ValueError, match="persistent"):
        run_strategy(ctx)


def test_autoflsat_incomplete_when_no_exchange_window_fits():
    clients, test = make_clients(4)
    windows = [intra(0, 1, 0, 10_000), intra(2, 3, 0, 10_000)]
    ctx = autoflsat_ctx(windows, clients, test)
    out = run_strategy(ctx)
    assert out.round_incomplete
    assert out.records == []


# ---------------------------------------------------------------- misc


def test_runs_are_deterministic():
    clients, test = make_clients(2)
    outs = []
    for _ in range(2):
        ctx = make_ctx(lockstep_windows(), clients, test, StrategyConfig(kind="fedavg"))
        outs.append(run_strategy(ctx))
    a, b = outs
    assert [r.end_s for r in a.records] == [r.end_s for r in b.records]
    assert a.accuracy_trace == b.accuracy_trace


def test_target_accuracy_stops_early():
    clients, test = make_clients(2)
    ctx = make_ctx(lockstep_windows(), clients, test, StrategyConfig(kind="fedavg"))
    ctx.target_accuracy = 0.0
    out = run_strategy(ctx)
    assert len(out.records) == 1


def test_strategy_config_validation():
    with pytest.raises(ValueError):
        StrategyConfig(kind="fedsgd")
    with pytest.raises(ValueError):
        StrategyConfig(kind="fedbuff", use_schedule=True)
    with pytest.raises(ValueError):
        StrategyConfig(kind="autoflsat", use_intra_sl=True)
    with pytest.raises(ValueError):
        StrategyConfig(kind="fedavg", use_schedule_v2=True)
    with pytest.raises(ValueError):
        StrategyConfig(max_clients_per_round=0)
    with pytest.raises(ValueError):
        StrategyConfig(kind="fedbuff", buffer_size=0)
    with pytest.raises(ValueError):
        StrategyConfig(staleness_bound=-1)


def test_provider_ring_persistence_edges():
    cons = ring3()
    full = StaticWindowProvider(ring_windows(), constellation=cons, start_s=0.0, horizon_end_s=1000.0)
    assert full.ring_persistent(0)
    gap = StaticWindowProvider(
        [intra(0, 1, 0, 1000), intra(1, 2, 0, 900), intra(0, 2, 0, 1000)],
        constellation=cons,
        start_s=0.0,
        horizon_end_s=1000.0,
    )
    assert not gap.ring_persistent(0)
    assert not StaticWindowProvider([], constellation=None).ring_persistent(0)
