"""Domain model: timetables, delay configuration, simulation outputs.

Times are integer seconds since midnight throughout. Timetables may run past
midnight using the 24+h clock convention (up to 30:00:00).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

MAX_CLOCK_SECONDS = 30 * 3600


class ModelError(ValueError):
    """Invalid model data or configuration."""


def parse_clock(text: str) -> int:
    """Parse HH:MM:SS into seconds since midnight (00:00:00 .. 30:00:00)."""
    parts = text.strip().split(":")
    if len(parts) != 3:
        raise ModelError(f"bad time {text!r}: expected HH:MM:SS")
    try:
        h, m, s = (int(p) for p in parts)
    except ValueError:
        raise ModelError(f"bad time {text!r}: non-numeric field") from None
    if not (0 <= m < 60 and 0 <= s < 60) or h < 0:
        raise ModelError(f"bad time {text!r}: field out of range")
    total = h * 3600 + m * 60 + s
    if total > MAX_CLOCK_SECONDS:
        raise ModelError(f"bad time {text!r}: beyond 30:00:00")
    return total


def format_clock(seconds: int) -> str:
    h, rem = divmod(int(seconds), 3600)
    m, s = divmod(rem, 60)
    return f"{h:02d}:{m:02d}:{s:02d}"


@dataclass(frozen=True)
class StationStop:
    station_id: str
    sched_departure: int
    sched_arrival: Optional[int] = None  # None at origin: treated as sched_departure
    platform_resource: Optional[str] = None
    outbound_segment: Optional[str] = None  # None at terminal stop
    passenger_load: Optional[int] = None

    @property
    def arrival(self) -> int:
        return self.sched_departure if self.sched_arrival is None else self.sched_arrival


@dataclass(frozen=True)
class TrainService:
    train_id: str
    category: str
    stops: tuple[StationStop, ...]

    @property
    def first_departure(self) -> int:
        return self.stops[0].sched_departure

    @property
    def last_arrival(self) -> int:
        return self.stops[-1].arrival


@dataclass(frozen=True)
class Resource:
    resource_id: str
    kind: str  # "segment" | "platform"
    min_headway: int


@dataclass(frozen=True)
class Timetable:
    trains: tuple[TrainService, ...]
    resources: tuple[Resource, ...]

    def train(self, train_id: str) -> TrainService:
        for t in self.trains:
            if t.train_id == train_id:
                return t
        raise ModelError(f"unknown train {train_id!r}")

    def resource(self, resource_id: str) -> Resource:
        for r in self.resources:
            if r.resource_id == resource_id:
                return r
        raise ModelError(f"unknown resource {resource_id!r}")

    @property
    def station_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for t in self.trains:
            for s in t.stops:
                seen.setdefault(s.station_id, None)
        return sorted(seen)


@dataclass(frozen=True)
class SimParams:
    recovery_allowance: float = 0.05
    min_dwell_fraction: float = 0.5
    min_dwell_floor: int = 30
    runtime_jitter: int = 0  # half-width in seconds; 0 disables early arrivals

    def __post_init__(self):
        if not 0.0 <= self.recovery_allowance <= 0.2:
            raise ModelError("recovery_allowance must be in [0, 0.2]")
        if not 0.0 <= self.min_dwell_fraction <= 1.0:
            raise ModelError("min_dwell_fraction must be in [0, 1]")
        if self.min_dwell_floor < 0:
            raise ModelError("min_dwell_floor must be >= 0")
        if self.runtime_jitter < 0:
            raise ModelError("runtime_jitter must be >= 0")


@dataclass(frozen=True)
class Exponential:
    mean_seconds: float
    kind: str = field(default="exponential", init=False)


@dataclass(frozen=True)
class LogNormal:
    mu: float
    sigma: float
    kind: str = field(default="lognormal", init=False)


@dataclass(frozen=True)
class Empirical:
    # (seconds, weight) pairs; weights positive, not necessarily normalized
    outcomes: tuple[tuple[float, float], ...]
    kind: str = field(default="empirical", init=False)

    def __post_init__(self):
        if not self.outcomes or any(w <= 0 for _, w in self.outcomes):
            raise ModelError("empirical distribution needs positive weights")


Magnitude = Exponential | LogNormal | Empirical


@dataclass(frozen=True)
class DelayRule:
    selector: str  # train category, or "*" for all
    per_stop_probability: float
    magnitude: Magnitude

    def __post_init__(self):
        if not 0.0 <= self.per_stop_probability <= 1.0:
            raise ModelError("per_stop_probability must be in [0, 1]")


@dataclass(frozen=True)
class DelayConfig:
    rules: tuple[DelayRule, ...]

    def rule_for(self, category: str) -> DelayRule:
        """First matching rule wins; '*' matches every category."""
        for rule in self.rules:
            if rule.selector == "*" or rule.selector == category:
                return rule
        raise ModelError(f"no delay rule matches category {category!r} and no '*' rule exists")


@dataclass(frozen=True)
class PrimaryDelayEvent:
    train_id: str
    stop_index: int
    delay: int
    run_index: int


@dataclass(frozen=True)
class Attribution:
    run_index: int
    causer: str
    sufferer: str
    resource_id: str
    seconds: int
    sufferer_stop_index: int


@dataclass(frozen=True)
class RunResult:
    run_index: int
    # train_id -> list of (actual_arrival, actual_departure), aligned with stops
    actual_times: dict[str, list[tuple[int, int]]]
    primary_events: tuple[PrimaryDelayEvent, ...]
    attributions: tuple[Attribution, ...]


@dataclass(frozen=True)
class Ensemble:
    ensemble_id: str
    timetable: Timetable
    delay_config: DelayConfig
    sim_params: SimParams
    master_seed: int
    runs: tuple[RunResult, ...]

    @property
    def n_runs(self) -> int:
        return len(self.runs)

    def arrival_lateness(self, train_id: str, run_index: int) -> list[int]:
        """Signed arrival lateness in seconds at each stop, one run."""
        train = self.timetable.train(train_id)
        times = self.runs[run_index].actual_times[train_id]
        return [times[i][0] - train.stops[i].arrival for i in range(len(train.stops))]


def validate_timetable(timetable: Timetable) -> list[str]:
    """Check all structural invariants; returns human-readable violations."""
    violations: list[str] = []
    resource_ids = {r.resource_id for r in timetable.resources}
    for r in timetable.resources:
        if r.kind not in ("segment", "platform"):
            violations.append(f"resource {r.resource_id}: unknown kind {r.kind!r}")
        if r.min_headway <= 0:
            violations.append(f"resource {r.resource_id}: min_headway must be positive")

    seen_trains: set[str] = set()
    for train in timetable.trains:
        tid = train.train_id
        if tid in seen_trains:
            violations.append(f"train {tid}: duplicate train_id")
        seen_trains.add(tid)
        if len(train.stops) < 2:
            violations.append(f"train {tid}: needs at least 2 stops")
        prev_time = None
        for i, stop in enumerate(train.stops):
            where = f"train {tid} stop {i} ({stop.station_id})"
            if stop.sched_departure < stop.arrival:
                violations.append(f"{where}: sched_departure before sched_arrival")
            if prev_time is not None and stop.arrival <= prev_time:
                violations.append(f"{where}: stop times must strictly increase")
            prev_time = stop.sched_departure
            if stop.platform_resource and stop.platform_resource not in resource_ids:
                violations.append(f"{where}: undefined platform resource {stop.platform_resource}")
            if stop.outbound_segment and stop.outbound_segment not in resource_ids:
                violations.append(f"{where}: undefined segment {stop.outbound_segment}")
            if i == len(train.stops) - 1 and stop.outbound_segment:
                violations.append(f"{where}: terminal stop must not have an outbound segment")
            if stop.passenger_load is not None and stop.passenger_load < 0:
                violations.append(f"{where}: negative passenger_load")
    return violations
