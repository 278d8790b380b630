"""Communication, power, and time accounting for scenario runs.

Every satellite gets a phase timeline: transmit, receive, and compute
segments laid down by the strategy as it walks the contact plan. Anything
not covered by a segment is idle. Round records are mean-per-participant
slices of those timelines, built so that comm + compute + idle always equals
the round duration exactly.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .learning import payload_bytes


@dataclass(frozen=True)
class CommModel:
    """Link model shared by ground and inter-satellite transfers.

    param_count_override sizes payloads for a model other than the one being
    trained (for example, pricing a 11.7M-parameter network while the desk
    model actually trains a tiny head); None means size the live model.
    """

    data_rate_bytes_per_s: float = 1_000_000.0
    bits_per_param: int = 32
    param_count_override: int | None = None

    def __post_init__(self) -> None:
        if self.data_rate_bytes_per_s <= 0:
            raise ValueError(f"data rate must be positive, got {self.data_rate_bytes_per_s}")
        if self.param_count_override is not None and self.param_count_override < 0:
            raise ValueError("param_count_override must be >= 0")

    def payload_bytes(self, live_param_count: int) -> int:
        count = self.param_count_override if self.param_count_override is not None else live_param_count
        return payload_bytes(count, self.bits_per_param)


def transmission_time_s(payload_size_bytes: int, comm: CommModel) -> float:
    """Seconds to move a payload over the link; zero bytes take zero time."""
    if payload_size_bytes < 0:
        raise ValueError(f"payload must be >= 0 bytes, got {payload_size_bytes}")
    return payload_size_bytes / comm.data_rate_bytes_per_s


@dataclass(frozen=True)
class PowerModel:
    """Mode powers (mW) and duty cycles for orbital-average power.

    The default duty cycles describe a training-heavy FL duty profile:
    80% of the orbit training, 20% training while transmitting. Idle power
    is accounted only when count_idle is set; by default the average covers
    the FL-added modes alone.
    """

    low_power_idle_mw: float = 760.0
    radio_tx_mw: float = 1613.0
    training_mw: float = 2178.0
    training_plus_tx_mw: float = 3138.0
    duty_idle: float = 0.0
    duty_radio_tx: float = 0.0
    duty_training: float = 0.8
    duty_training_plus_tx: float = 0.2
    count_idle: bool = False

    def __post_init__(self) -> None:
        duties = (self.duty_idle, self.duty_radio_tx, self.duty_training, self.duty_training_plus_tx)
        if any(d < 0 or d > 1 for d in duties):
            raise ValueError(f"duty cycles must lie in [0, 1], got {duties}")
        if sum(duties) > 1.0 + 1e-9:
            raise ValueError(f"duty cycles must sum to <= 1, got {sum(duties)}")


def power_contributions(pm: PowerModel) -> dict[str, float]:
    """Per-mode contributions (mW) to the orbital average."""
    out = {
        "radio_tx": pm.duty_radio_tx * pm.radio_tx_mw,
        "training": pm.duty_training * pm.training_mw,
        "training_plus_tx": pm.duty_training_plus_tx * pm.training_plus_tx_mw,
    }
    if pm.count_idle:
        out["low_power_idle"] = pm.duty_idle * pm.low_power_idle_mw
    return out


def orbital_average_power_mw(pm: PowerModel) -> float:
    """Duty-cycle-weighted mean power over one orbit, in mW."""
    return sum(power_contributions(pm).values())


def _merge(segments: list[tuple[float, float]]) -> list[tuple[float, float]]:
    if not segments:
        return []
    segs = sorted(segments)
    out = [segs[0]]
    for s, e in segs[1:]:
        ls, le = out[-1]
        if s <= le:
            out[-1] = (ls, max(le, e))
        else:
            out.append((s, e))
    return out


def _measure(merged: list[tuple[float, float]], a: float, b: float) -> float:
    """Total overlap of merged segments with [a, b]."""
    if not merged or b <= a:
        return 0.0
    starts = [s for s, _ in merged]
    i = max(0, bisect.bisect_right(starts, a) - 1)
    total = 0.0
    for s, e in merged[i:]:
        if s >= b:
            break
        lo, hi = max(s, a), min(e, b)
        if hi > lo:
            total += hi - lo
    return total


def _subtract(base: list[tuple[float, float]], remove: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Merged base intervals minus merged remove intervals."""
    out = []
    ri = 0
    for s, e in base:
        cur = s
        while ri < len(remove) and remove[ri][1] <= cur:
            ri += 1
        j = ri
        while j < len(remove) and remove[j][0] < e:
            rs, re = remove[j]
            if rs > cur:
                out.append((cur, min(rs, e)))
            cur = max(cur, re)
            if cur >= e:
                break
            j += 1
        if cur < e:
            out.append((cur, e))
    return out


@dataclass(frozen=True)
class PhaseSlice:
    """Phase occupancy of one satellite (or a mean) over a time window."""

    comm_up_s: float
    comm_down_s: float
    compute_s: float
    idle_s: float

    @property
    def comm_s(self) -> float:
        return self.comm_up_s + self.comm_down_s


class PhaseTimeline:
    """Activity record of one satellite over the whole scenario.

    Segments may be appended in any order. Compute laid over a transmit or
    receive span (a satellite relaying while it trains) is counted as
    communication, which is the higher-power mode; transmit and receive are
    never scheduled to overlap on one satellite.
    """

    def __init__(self) -> None:
        self._tx: list[tuple[float, float]] = []
        self._rx: list[tuple[float, float]] = []
        self._compute: list[tuple[float, float]] = []
        self._cache: tuple[list, list, list] | None = None

    def mark_tx(self, start_s: float, end_s: float) -> None:
        if end_s > start_s:
            self._tx.append((start_s, end_s))
            self._cache = None

    def mark_rx(self, start_s: float, end_s: float) -> None:
        if end_s > start_s:
            self._rx.append((start_s, end_s))
            self._cache = None

    def mark_compute(self, start_s: float, end_s: float) -> None:
        if end_s > start_s:
            self._compute.append((start_s, end_s))
            self._cache = None

    def _merged(self) -> tuple[list, list, list]:
        if self._cache is None:
            tx = _merge(self._tx)
            rx = _merge(self._rx)
            comm = _merge(tx + rx)
            compute = _subtract(_merge(self._compute), comm)
            self._cache = (tx, rx, compute)
        return self._cache

    def occupancy(self, start_s: float, end_s: float) -> PhaseSlice:
        """Phase split of [start, end]; the remainder is idle."""
        if end_s < start_s:
            raise ValueError(f"need end >= start, got [{start_s}, {end_s}]")
        tx, rx, compute = self._merged()
        up = _measure(tx, start_s, end_s)
        down = _measure(rx, start_s, end_s)
        comp = _measure(compute, start_s, end_s)
        idle = (end_s - start_s) - up - down - comp
        return PhaseSlice(comm_up_s=up, comm_down_s=down, compute_s=comp, idle_s=idle)


@dataclass(frozen=True)
class RoundRecord:
    """One completed aggregation round.

    The comm/compute/idle fields are means over the round's participants of
    their timeline occupancy between start_s and end_s; idle is defined as
    the remainder, so comm_s + compute_s + idle_s equals the duration
    exactly.
    """

    round_index: int
    start_s: float
    end_s: float
    participants: tuple[int, ...]
    comm_up_s: float
    comm_down_s: float
    compute_s: float
    idle_s: float
    accuracy: float

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s

    @property
    def comm_s(self) -> float:
        return self.comm_up_s + self.comm_down_s


def make_round_record(
    round_index: int,
    start_s: float,
    end_s: float,
    participants: Sequence[int],
    timelines: dict[int, PhaseTimeline],
    accuracy: float,
) -> RoundRecord:
    """Build a record whose phase split is the participant mean, idle last."""
    if not participants:
        raise ValueError("a round needs at least one participant")
    n = len(participants)
    up = down = comp = 0.0
    for sat in participants:
        occ = timelines[sat].occupancy(start_s, end_s)
        up += occ.comm_up_s
        down += occ.comm_down_s
        comp += occ.compute_s
    up, down, comp = up / n, down / n, comp / n
    idle = (end_s - start_s) - up - down - comp
    return RoundRecord(
        round_index=round_index,
        start_s=start_s,
        end_s=end_s,
        participants=tuple(participants),
        comm_up_s=up,
        comm_down_s=down,
        compute_s=comp,
        idle_s=idle,
        accuracy=accuracy,
    )


@dataclass(frozen=True)
class PhaseTotals:
    comm_up_s: float
    comm_down_s: float
    compute_s: float
    idle_s: float
    total_s: float

    @property
    def comm_s(self) -> float:
        return self.comm_up_s + self.comm_down_s


def idle_breakdown(records: Iterable[RoundRecord]) -> PhaseTotals:
    """Sum phase time across rounds; totals conserve total round time."""
    up = down = comp = idle = total = 0.0
    for r in records:
        up += r.comm_up_s
        down += r.comm_down_s
        comp += r.compute_s
        idle += r.idle_s
        total += r.duration_s
    return PhaseTotals(comm_up_s=up, comm_down_s=down, compute_s=comp, idle_s=idle, total_s=total)


@dataclass
class MetricsReport:
    """Everything a scenario run reports.

    Serialization is deterministic: identical (config, seed) runs produce
    byte-identical JSON and CSV.
    """

    strategy: str
    seed: int
    rounds: list[RoundRecord] = field(default_factory=list)
    accuracy_trace: list[tuple[float, float]] = field(default_factory=list)
    target_accuracy: float | None = None
    time_to_target_s: float | None = None
    total_span_s: float = 0.0
    oap_mw: float = 0.0
    insufficient_clients: bool = False
    round_incomplete: bool = False

    @property
    def rounds_completed(self) -> int:
        return len(self.rounds)

    @property
    def mean_round_duration_s(self) -> float:
        return sum(r.duration_s for r in self.rounds) / len(self.rounds) if self.rounds else 0.0

    @property
    def max_round_duration_s(self) -> float:
        return max((r.duration_s for r in self.rounds), default=0.0)

    @property
    def mean_idle_per_round_s(self) -> float:
        return sum(r.idle_s for r in self.rounds) / len(self.rounds) if self.rounds else 0.0

    @property
    def max_accuracy(self) -> float:
        return max((acc for _, acc in self.accuracy_trace), default=0.0)

    @property
    def final_accuracy(self) -> float:
        return self.accuracy_trace[-1][1] if self.accuracy_trace else 0.0

    def to_json_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "seed": self.seed,
            "rounds_completed": self.rounds_completed,
            "mean_round_duration_s": self.mean_round_duration_s,
            "max_round_duration_s": self.max_round_duration_s,
            "mean_idle_per_round_s": self.mean_idle_per_round_s,
            "max_accuracy": self.max_accuracy,
            "final_accuracy": self.final_accuracy,
            "target_accuracy": self.target_accuracy,
            "time_to_target_s": self.time_to_target_s,
            "total_span_s": self.total_span_s,
            "oap_mw": self.oap_mw,
            "insufficient_clients": self.insufficient_clients,
            "round_incomplete": self.round_incomplete,
            "accuracy_trace": [[t, a] for t, a in self.accuracy_trace],
            "rounds": [
                {
                    "round": r.round_index,
                    "start_s": r.start_s,
                    "end_s": r.end_s,
                    "participants": list(r.participants),
                    "comm_up_s": r.comm_up_s,
                    "comm_down_s": r.comm_down_s,
                    "comm_s": r.comm_s,
                    "compute_s": r.compute_s,
                    "idle_s": r.idle_s,
                    "accuracy": r.accuracy,
                }
                for r in self.rounds
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    def write_rounds_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("round,start_s,end_s,comm_s,compute_s,idle_s,accuracy\n")
            for r in self.rounds:
                fh.write(
                    f"{r.round_index},{r.start_s!r},{r.end_s!r},{r.comm_s!r},"
                    f"{r.compute_s!r},{r.idle_s!r},{r.accuracy!r}\n"
                )

    def write_accuracy_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("sim_time_s,accuracy\n")
            for t, acc in self.accuracy_trace:
                fh.write(f"{t!r},{acc!r}\n")


def measured_power(pm: PowerModel, timelines: dict[int, PhaseTimeline], t0_s: float, t1_s: float) -> float:
    """Orbital-average power from simulated duty cycles.

    The observed comm fraction runs at radio-TX power and the compute
    fraction at training power; overlap was already folded into comm by the
    timeline. Idle contributes only if the model counts it.
    """
    if t1_s <= t0_s or not timelines:
        return 0.0
    span = (t1_s - t0_s) * len(timelines)
    comm = comp = 0.0
    for tl in timelines.values():
        occ = tl.occupancy(t0_s, t1_s)
        comm += occ.comm_s
        comp += occ.compute_s
    duty_comm = comm / span
    duty_comp = comp / span
    duty_idle = max(0.0, 1.0 - duty_comm - duty_comp)
    return orbital_average_power_mw(
        replace(
            pm,
            duty_radio_tx=duty_comm,
            duty_training=duty_comp,
            duty_training_plus_tx=0.0,
            duty_idle=duty_idle,
        )
    )
