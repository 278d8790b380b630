"""The four federation protocols, driven by contact windows.

Each strategy walks ground-contact (and for the autonomous variant,
inter-plane) windows in time order and lays satellite activity onto phase
timelines. All of them are synchronous Python state machines over a window
provider: either a fixed window list (tests) or the lazily extending
provider built by the scenario runner.

Conventions shared by every strategy:
  * selection counts discrete contact events; transfers may start mid-pass
    but must finish inside their window, and never resume across windows;
  * a dispatch and its return always use distinct windows of the satellite;
  * transmitted parameter vectors go through the configured quantizer;
  * ties anywhere resolve by time, then satellite id, then peer id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .constants import MAX_ROUNDS
from .contacts import (
    INTER_SL,
    INTRA_SL,
    SAT_GS,
    ContactWindow,
    SchedulingHorizonExhausted,
    contact_events,
    fl_schedule,
    inter_sl_scheduler,
    intra_sl_schedule,
)
from .learning import (
    ClientDataset,
    ModelParams,
    TrainConfig,
    aggregate,
    epoch_time_s,
    evaluate,
    local_train,
    quantize_roundtrip,
    train_rng,
)
from .orbital import Constellation
from .simulation import CommModel, PhaseTimeline, RoundRecord, make_round_record, transmission_time_s

STRATEGY_KINDS = ("fedavg", "fedprox", "fedbuff", "autoflsat")


@dataclass(frozen=True)
class StrategyConfig:
    """Which protocol runs and how it selects clients.

    max_clients_per_round is a ceiling: each round uses
    min(max_clients_per_round, total satellites) clients. buffer_size of
    None lets the buffered strategy default to that same number.
    """

    kind: str = "fedavg"
    max_clients_per_round: int = 10
    buffer_size: int | None = None
    staleness_bound: int = 3
    use_schedule: bool = False
    use_schedule_v2: bool = False
    use_intra_sl: bool = False

    def __post_init__(self) -> None:
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}, expected one of {STRATEGY_KINDS}")
        if self.max_clients_per_round < 1:
            raise ValueError("max_clients_per_round must be >= 1")
        if self.buffer_size is not None and self.buffer_size < 1:
            raise ValueError("buffer_size must be >= 1 when set")
        if self.staleness_bound < 0:
            raise ValueError("staleness_bound must be >= 0")
        augmented = self.use_schedule or self.use_schedule_v2 or self.use_intra_sl
        if augmented and self.kind not in ("fedavg", "fedprox"):
            raise ValueError(f"schedule augmentations do not apply to {self.kind}")
        if self.use_schedule_v2 and self.kind != "fedprox":
            raise ValueError("schedule_v2 only applies to fedprox (it floors variable epochs)")

    @property
    def scheduled(self) -> bool:
        return self.use_schedule or self.use_schedule_v2 or self.use_intra_sl


class StaticWindowProvider:
    """Window source over a fixed list; the reference provider interface.

    The scenario runner substitutes a lazily extending subclass; strategies
    only ever call windows/sat_gs_windows/inter_windows/ring_persistent and
    extend(), which here always answers False (nothing more to materialize).
    """

    def __init__(
        self,
        windows: list[ContactWindow],
        constellation: Constellation | None = None,
        start_s: float = 0.0,
        horizon_end_s: float | None = None,
    ) -> None:
        self.constellation = constellation
        self.start_s = start_s
        if horizon_end_s is None:
            horizon_end_s = max((w.end_s for w in windows), default=start_s)
        self.horizon_end_s = horizon_end_s
        self._windows: list[ContactWindow] = []
        self._sat_gs: dict[int, list[ContactWindow]] = {}
        self._inter: list[ContactWindow] = []
        self._intra: list[ContactWindow] = []
        self._absorb(windows)

    def _absorb(self, new_windows: list[ContactWindow]) -> None:
        self._windows = sorted(self._windows + list(new_windows), key=lambda w: (w.start_s, w.a, w.b))
        self._sat_gs = {}
        self._inter = []
        self._intra = []
        for w in self._windows:
            if w.kind == SAT_GS:
                self._sat_gs.setdefault(w.a, []).append(w)
            elif w.kind == INTER_SL:
                self._inter.append(w)
            elif w.kind == INTRA_SL:
                self._intra.append(w)

    @property
    def windows(self) -> list[ContactWindow]:
        return self._windows

    def sat_gs_windows(self, sat: int) -> list[ContactWindow]:
        return self._sat_gs.get(sat, [])

    def inter_windows(self) -> list[ContactWindow]:
        return self._inter

    def intra_windows(self) -> list[ContactWindow]:
        return self._intra

    def ring_persistent(self, cluster: int) -> bool:
        """True when every adjacent pair of the cluster's ring is linked
        over the whole horizon, so relays are available at any instant."""
        if self.constellation is None:
            return False
        members = list(self.constellation.cluster_members(cluster))
        if len(members) < 2:
            return False
        pairs = {(w.a, w.b) for w in self._intra if w.start_s <= self.start_s and w.end_s >= self.horizon_end_s}
        if len(members) == 2:
            need = [(members[0], members[1])]
        else:
            need = [
                (members[j], members[(j + 1) % len(members)])
                for j in range(len(members))
            ]
        return all((a, b) in pairs or (b, a) in pairs for a, b in need)

    def extend(self) -> bool:
        """Materialize more windows; static lists have nothing further."""
        return False


@dataclass
class RunContext:
    """Everything a strategy needs to execute one scenario."""

    provider: StaticWindowProvider
    strategy: StrategyConfig
    train: TrainConfig
    comm: CommModel
    clients: list[ClientDataset]
    test_set: ClientDataset
    initial_params: ModelParams
    seed: int
    max_rounds: int = MAX_ROUNDS
    target_accuracy: float | None = None
    timelines: dict[int, PhaseTimeline] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for sat in range(len(self.clients)):
            self.timelines.setdefault(sat, PhaseTimeline())

    @property
    def constellation(self) -> Constellation | None:
        return self.provider.constellation

    @property
    def num_satellites(self) -> int:
        return len(self.clients)

    def epoch_time(self, sat: int) -> float:
        return epoch_time_s(len(self.clients[sat]), self.train.throughput_samples_per_s)

    def payload(self) -> int:
        return self.comm.payload_bytes(len(self.initial_params.values))


@dataclass
class StrategyOutcome:
    records: list[RoundRecord]
    accuracy_trace: list[tuple[float, float]]
    end_s: float
    round_incomplete: bool = False


@dataclass(frozen=True)
class _ReturnPlan:
    """A concrete upload opportunity for one trained client."""

    upload_start_s: float
    completion_s: float
    train_stop_s: float
    uploader: int
    relay_path: tuple[int, ...]


def _transmit(values, comm: CommModel):
    return quantize_roundtrip(values, comm.bits_per_param)


def _schedule_selection(ctx: RunContext, count: int, t_s: float):
    while True:
        try:
            if ctx.strategy.use_intra_sl:
                if ctx.constellation is None:
                    raise ValueError("intra_sl scheduling needs a constellation")
                return intra_sl_schedule(ctx.provider.windows, ctx.constellation, count, t_s)
            return fl_schedule(ctx.provider.windows, count, t_s)
        except SchedulingHorizonExhausted:
            if not ctx.provider.extend():
                raise


def _first_contact_selection(ctx: RunContext, count: int, t_s: float, tx_down_s: float):
    """First `count` distinct satellites with a dispatch-feasible contact."""
    chosen: dict[int, tuple[ContactWindow, float]] = {}
    pos = 0
    while True:
        events = contact_events(ctx.provider.windows, t_s)
        while pos < len(events):
            te, w = events[pos]
            pos += 1
            if w.a in chosen:
                continue
            if te + tx_down_s <= w.end_s:
                chosen[w.a] = (w, te)
                if len(chosen) == count:
                    return chosen
        if not ctx.provider.extend():
            raise SchedulingHorizonExhausted(
                f"only {len(chosen)} of {count} clients reachable within the horizon"
            )


def _find_dispatch(ctx: RunContext, sat: int, t_s: float, tx_down_s: float):
    """Earliest contact of `sat` from t whose remaining span fits the model."""
    while True:
        for w in ctx.provider.sat_gs_windows(sat):
            if w.end_s <= t_s:
                continue
            s = max(w.start_s, t_s)
            if s + tx_down_s <= w.end_s:
                return w, s
        if not ctx.provider.extend():
            raise SchedulingHorizonExhausted(f"no dispatch window for satellite {sat} within the horizon")


def _ring_path(constellation: Constellation, src: int, dst: int) -> tuple[int, ...]:
    """Shortest intra-plane path src..dst inclusive; ties go the increasing way."""
    cluster = constellation.cluster_of(src)
    size = constellation.sats_per_cluster
    base = cluster * size
    i, j = src - base, dst - base
    fwd = (j - i) % size
    back = (i - j) % size
    step = 1 if fwd <= back else -1
    hops = min(fwd, back)
    return tuple(base + ((i + step * k) % size) for k in range(hops + 1))


def _return_candidates_direct(ctx, sat, dispatch_window, ready_s, tx_up_s, min_gap_s, train_from_s):
    """Earliest feasible direct return after the dispatch window."""
    for w in ctx.provider.sat_gs_windows(sat):
        if w.start_s <= dispatch_window.start_s:
            continue
        start = max(w.start_s, ready_s)
        if start + tx_up_s > w.end_s:
            continue
        if start - train_from_s < min_gap_s:
            continue
        return _ReturnPlan(start, start + tx_up_s, start, sat, (sat,))
    return None


def _return_candidates_relay(ctx, sat, ready_s, tx_up_s, tx_isl_s, min_gap_s, train_from_s):
    """Earliest feasible relayed return via each same-plane peer."""
    constellation = ctx.constellation
    if constellation is None or not ctx.strategy.use_intra_sl:
        return []
    cluster = constellation.cluster_of(sat)
    if not ctx.provider.ring_persistent(cluster):
        return []
    plans = []
    for peer in constellation.cluster_members(cluster):
        if peer == sat:
            continue
        path = _ring_path(constellation, sat, peer)
        relay_cost = (len(path) - 1) * tx_isl_s
        for w in ctx.provider.sat_gs_windows(peer):
            start = max(w.start_s, ready_s + relay_cost)
            if start + tx_up_s > w.end_s or w.end_s <= ready_s:
                continue
            stop = start - relay_cost
            if stop - train_from_s < min_gap_s:
                continue
            plans.append(_ReturnPlan(start, start + tx_up_s, stop, peer, path))
            break
    return plans


def _find_return(ctx, sat, dispatch_window, ready_s, tx_up_s, tx_isl_s, min_gap_s, train_from_s):
    """Best return plan: min completion, direct preferred, then lower peer id."""
    while True:
        cands = []
        direct = _return_candidates_direct(
            ctx, sat, dispatch_window, ready_s, tx_up_s, min_gap_s, train_from_s
        )
        if direct is not None:
            cands.append(direct)
        cands.extend(
            _return_candidates_relay(ctx, sat, ready_s, tx_up_s, tx_isl_s, min_gap_s, train_from_s)
        )
        if cands:
            return min(cands, key=lambda p: (p.completion_s, len(p.relay_path), p.uploader))
        if not ctx.provider.extend():
            raise SchedulingHorizonExhausted(f"no return window for satellite {sat} within the horizon")


def _mark_relay(ctx: RunContext, plan: _ReturnPlan, tx_isl_s: float) -> None:
    hop_start = plan.train_stop_s
    for a, b in zip(plan.relay_path, plan.relay_path[1:]):
        ctx.timelines[a].mark_tx(hop_start, hop_start + tx_isl_s)
        ctx.timelines[b].mark_rx(hop_start, hop_start + tx_isl_s)
        hop_start += tx_isl_s


def _run_synchronous(ctx: RunContext) -> StrategyOutcome:
    """FedAvg/FedProx round loop over ground-station contacts.

    A round dispatches the global model to m clients at their first usable
    contacts, waits for every client's return, aggregates, evaluates. The
    fixed-epoch variant idles between training and return; the proximal
    variant trains through the whole gap.
    """
    cfg = ctx.strategy
    prox = cfg.kind == "fedprox"
    m = min(cfg.max_clients_per_round, ctx.num_satellites)
    payload = ctx.payload()
    tx_gs = transmission_time_s(payload, ctx.comm)
    tx_isl = tx_gs  # one shared link model

    global_params = ctx.initial_params.copy()
    records: list[RoundRecord] = []
    trace: list[tuple[float, float]] = []
    t = ctx.provider.start_s
    incomplete = False

    for round_idx in range(ctx.max_rounds):
        try:
            if cfg.scheduled:
                entries = _schedule_selection(ctx, m, t)
                dispatches = {e.satellite: _find_dispatch(ctx, e.satellite, t, tx_gs) for e in entries}
            else:
                dispatches = {
                    sat: (w, s) for sat, (w, s) in _first_contact_selection(ctx, m, t, tx_gs).items()
                }

            sent_values = _transmit(global_params.values, ctx.comm)
            updates = []
            round_end = t
            for sat in sorted(dispatches):
                window, s = dispatches[sat]
                rx_done = s + tx_gs
                ctx.timelines[sat].mark_rx(s, rx_done)
                received = ModelParams(values=sent_values.copy(), round_tag=round_idx)
                et = ctx.epoch_time(sat)

                if prox:
                    min_gap = ctx.train.min_epochs * et if cfg.use_schedule_v2 else 0.0
                    plan = _find_return(ctx, sat, window, rx_done, tx_gs, tx_isl, min_gap, rx_done)
                    nominal = int(math.floor((plan.train_stop_s - rx_done) / et)) if et > 0 else 0
                    executed = min(nominal, ctx.train.max_gap_epochs)
                    ctx.timelines[sat].mark_compute(rx_done, plan.train_stop_s)
                else:
                    epochs = ctx.train.local_epochs
                    ready = rx_done + epochs * et
                    ctx.timelines[sat].mark_compute(rx_done, ready)
                    plan = _find_return(ctx, sat, window, ready, tx_gs, tx_isl, 0.0, rx_done)
                    nominal = executed = epochs

                update = local_train(
                    received,
                    ctx.clients[sat],
                    ctx.train,
                    rng=train_rng(ctx.seed, round_idx, sat),
                    epochs=executed,
                )
                update.epochs_trained = nominal
                update.values = _transmit(update.values, ctx.comm)
                if len(plan.relay_path) > 1:
                    _mark_relay(ctx, plan, tx_isl)
                ctx.timelines[plan.uploader].mark_tx(plan.upload_start_s, plan.completion_s)
                updates.append(update)
                round_end = max(round_end, plan.completion_s)
        except SchedulingHorizonExhausted:
            incomplete = True
            break

        global_params = aggregate(updates)
        global_params.round_tag = round_idx + 1
        acc = evaluate(global_params, ctx.test_set)
        trace.append((round_end, acc))
        records.append(
            make_round_record(round_idx, t, round_end, sorted(dispatches), ctx.timelines, acc)
        )
        t = round_end
        if ctx.target_accuracy is not None and acc >= ctx.target_accuracy:
            break

    return StrategyOutcome(records, trace, t, round_incomplete=incomplete)


@dataclass
class _BuffClient:
    training: bool = False
    train_start_s: float = 0.0
    base_tag: int = 0
    params: ModelParams | None = None
    sessions: int = 0


def _run_buffered(ctx: RunContext) -> StrategyOutcome:
    """Asynchronous buffered aggregation.

    Every satellite free-runs: download the current global model at a
    contact, train until the next usable contact, upload there, download
    again, repeat. The server aggregates whenever the buffer holds
    buffer_size accepted updates; an update based on a model more than
    staleness_bound rounds old is dropped without filling the buffer.
    """
    cfg = ctx.strategy
    d_size = cfg.buffer_size if cfg.buffer_size is not None else min(cfg.max_clients_per_round, ctx.num_satellites)
    payload = ctx.payload()
    tx = transmission_time_s(payload, ctx.comm)

    global_params = ctx.initial_params.copy()
    state = {sat: _BuffClient() for sat in range(ctx.num_satellites)}
    buffer: list[ModelParams] = []
    buffer_sats: list[int] = []
    current_round = 0
    last_agg_t = ctx.provider.start_s
    records: list[RoundRecord] = []
    trace: list[tuple[float, float]] = []
    end_t = ctx.provider.start_s

    def try_download(sat: int, at_s: float, window: ContactWindow) -> None:
        st = state[sat]
        if at_s + tx > window.end_s:
            return
        ctx.timelines[sat].mark_rx(at_s, at_s + tx)
        st.params = ModelParams(values=_transmit(global_params.values, ctx.comm), round_tag=current_round)
        st.base_tag = current_round
        st.training = True
        st.train_start_s = at_s + tx
        st.sessions += 1

    pos = 0
    stop = False
    while not stop:
        events = contact_events(ctx.provider.windows, ctx.provider.start_s)
        progressed = False
        while pos < len(events) and not stop:
            te, w = events[pos]
            pos += 1
            progressed = True
            sat = w.a
            st = state[sat]
            end_t = max(end_t, te)
            if not st.training:
                try_download(sat, te, w)
                continue
            if te + tx > w.end_s:
                continue  # pass too short to upload; keep training through it
            et = ctx.epoch_time(sat)
            nominal = int(math.floor((te - st.train_start_s) / et)) if et > 0 else 0
            executed = min(nominal, ctx.train.max_gap_epochs)
            assert st.params is not None
            update = local_train(
                st.params,
                ctx.clients[sat],
                ctx.train,
                rng=train_rng(ctx.seed, st.sessions, sat),
                epochs=executed,
            )
            update.round_tag = st.base_tag
            update.epochs_trained = nominal
            update.values = _transmit(update.values, ctx.comm)
            ctx.timelines[sat].mark_compute(st.train_start_s, te)
            ctx.timelines[sat].mark_tx(te, te + tx)
            st.training = False
            deposit_t = te + tx
            end_t = max(end_t, deposit_t)

            if current_round - update.round_tag <= cfg.staleness_bound:
                buffer.append(update)
                buffer_sats.append(sat)
                if len(buffer) == d_size:
                    global_params = aggregate(buffer)
                    global_params.round_tag = current_round + 1
                    acc = evaluate(global_params, ctx.test_set)
                    trace.append((deposit_t, acc))
                    records.append(
                        make_round_record(
                            current_round, last_agg_t, deposit_t, sorted(set(buffer_sats)), ctx.timelines, acc
                        )
                    )
                    current_round += 1
                    last_agg_t = deposit_t
                    buffer = []
                    buffer_sats = []
                    if ctx.target_accuracy is not None and acc >= ctx.target_accuracy:
                        stop = True
                    if current_round >= ctx.max_rounds:
                        stop = True
            # Fresh model rides the same pass when it still fits.
            if not stop:
                try_download(sat, deposit_t, w)
        if stop:
            break
        if not ctx.provider.extend():
            break
        if not progressed and pos >= len(events):
            break

    return StrategyOutcome(records, trace, end_t, round_incomplete=False)


def _next_pair_exchange(ctx: RunContext, cluster_a: int, cluster_b: int, ready_s: float, tx_s: float):
    """Earliest cross-plane window of the cluster pair that fits an exchange."""
    constellation = ctx.constellation
    assert constellation is not None
    while True:
        best = None
        for w in ctx.provider.inter_windows():
            if w.end_s <= ready_s:
                continue
            ca, cb = constellation.cluster_of(w.a), constellation.cluster_of(w.b)
            if {ca, cb} != {cluster_a, cluster_b}:
                continue
            s = max(w.start_s, ready_s)
            if s + tx_s > w.end_s:
                continue
            key = (s, w.a, w.b)
            if best is None or key < best[0]:
                best = (key, w, s)
        if best is not None:
            _, w, s = best
            return w, s
        if not ctx.provider.extend():
            raise SchedulingHorizonExhausted(
                f"no exchange window for cluster pair ({cluster_a}, {cluster_b}) within the horizon"
            )


def _connection_plan(ctx: RunContext, t_s: float, payload: int, epoch_est_s: float):
    assert ctx.constellation is not None
    while True:
        try:
            return inter_sl_scheduler(
                ctx.constellation,
                ctx.provider.windows,
                t_s,
                payload,
                ctx.comm.data_rate_bytes_per_s,
                epoch_est_s,
            )
        except SchedulingHorizonExhausted:
            if not ctx.provider.extend():
                raise


def _run_autonomous(ctx: RunContext) -> StrategyOutcome:
    """Hierarchical ground-station-free rounds.

    Per round: plan one exchange per cluster pair (the plan's span sets the
    epoch budget), train every satellite, ring-aggregate each cluster,
    execute the exchanges, aggregate cluster models weighted by cluster
    sample counts, and ring-disseminate the constellation model. The
    initial model is assumed seeded before t=0; no ground station is used.
    """
    constellation = ctx.constellation
    if constellation is None:
        raise ValueError("autoflsat needs a constellation")
    if constellation.num_clusters < 2:
        raise ValueError("autoflsat needs at least two clusters")
    for c in range(constellation.num_clusters):
        if not ctx.provider.ring_persistent(c):
            raise ValueError(f"cluster {c} has no persistent intra-plane ring")

    payload = ctx.payload()
    tx = transmission_time_s(payload, ctx.comm)
    size = constellation.sats_per_cluster
    epoch_est = sum(ctx.epoch_time(s) for s in range(ctx.num_satellites)) / ctx.num_satellites

    global_params = ctx.initial_params.copy()
    records: list[RoundRecord] = []
    trace: list[tuple[float, float]] = []
    t = ctx.provider.start_s
    incomplete = False

    for round_idx in range(ctx.max_rounds):
        try:
            plan = _connection_plan(ctx, t, payload, epoch_est)
            executed = min(plan.epoch_budget, ctx.train.local_epochs)

            # Local training, then ring accumulation per cluster.
            cluster_models: list[ModelParams] = []
            ready: list[float] = []
            for c in range(constellation.num_clusters):
                members = list(constellation.cluster_members(c))
                updates = []
                train_end = t
                for sat in members:
                    et = ctx.epoch_time(sat)
                    done = t + executed * et
                    ctx.timelines[sat].mark_compute(t, done)
                    train_end = max(train_end, done)
                    update = local_train(
                        ModelParams(values=global_params.values.copy(), round_tag=round_idx),
                        ctx.clients[sat],
                        ctx.train,
                        rng=train_rng(ctx.seed, round_idx, sat),
                        epochs=executed,
                    )
                    update.epochs_trained = plan.epoch_budget
                    updates.append(update)
                hop_t = train_end
                for i in range(size - 1):
                    ctx.timelines[members[size - 1 - i]].mark_tx(hop_t, hop_t + tx)
                    ctx.timelines[members[size - 2 - i]].mark_rx(hop_t, hop_t + tx)
                    hop_t += tx
                model = aggregate(updates)
                model.values = _transmit(model.values, ctx.comm)
                cluster_models.append(model)
                ready.append(hop_t)

            # One exchange per unordered cluster pair, in plan order. A
            # cluster runs one cross-plane transfer at a time (single
            # cross-link), so its exchanges serialize.
            busy_until = list(ready)
            for e in plan.entries:
                ca, cb = e.cluster_a, e.cluster_b
                ready_ab = max(busy_until[ca], busy_until[cb])
                w, s = _next_pair_exchange(ctx, ca, cb, ready_ab, tx)
                ctx.timelines[w.a].mark_tx(s, s + tx)
                ctx.timelines[w.b].mark_tx(s, s + tx)
                busy_until[ca] = s + tx
                busy_until[cb] = s + tx
            received_at = busy_until

            global_params = aggregate(cluster_models)
            global_params.round_tag = round_idx + 1
            round_end = t
            for c in range(constellation.num_clusters):
                members = list(constellation.cluster_members(c))
                hop_t = received_at[c]
                for i in range(size - 1):
                    ctx.timelines[members[i]].mark_tx(hop_t, hop_t + tx)
                    ctx.timelines[members[i + 1]].mark_rx(hop_t, hop_t + tx)
                    hop_t += tx
                round_end = max(round_end, hop_t)
        except SchedulingHorizonExhausted:
            incomplete = True
            break

        acc = evaluate(global_params, ctx.test_set)
        trace.append((round_end, acc))
        records.append(
            make_round_record(round_idx, t, round_end, range(ctx.num_satellites), ctx.timelines, acc)
        )
        t = round_end
        if ctx.target_accuracy is not None and acc >= ctx.target_accuracy:
            break

    return StrategyOutcome(records, trace, t, round_incomplete=incomplete)


def run_strategy(ctx: RunContext) -> StrategyOutcome:
    """Execute the configured protocol over the context's windows."""
    kind = ctx.strategy.kind
    if kind in ("fedavg", "fedprox"):
        return _run_synchronous(ctx)
    if kind == "fedbuff":
        return _run_buffered(ctx)
    if kind == "autoflsat":
        return _run_autonomous(ctx)
    raise ValueError(f"unknown strategy kind {kind!r}")
