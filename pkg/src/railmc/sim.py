"""Single-day propagation and seeded ensemble simulation.

Knock-on mechanism: entry-headway queuing on shared segment/platform
resources in scheduled order (no overtaking). A train's departure from a
stop is pushed back until the headway behind the previous scheduled user
of each resource it is about to occupy is respected; every imposed wait
is recorded in the attribution ledger against that previous user.
"""
from __future__ import annotations

import hashlib
import math
import random
from collections import deque
from dataclasses import dataclass

from .model import (
    Attribution,
    DelayConfig,
    Empirical,
    Ensemble,
    Exponential,
    LogNormal,
    ModelError,
    PrimaryDelayEvent,
    RunResult,
    SimParams,
    Timetable,
    validate_timetable,
)


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ResourcePlan:
    # resource_id -> ordered (train_id, stop_index) by scheduled entry, ties by train_id
    queues: dict[str, list[tuple[str, int]]]
    # global processing order of (train_id, stop_index) departure computations
    topo_order: list[tuple[str, int]]


def _scheduled_entry(timetable: Timetable) -> list[tuple[int, str, str, int]]:
    entries = []
    for train in timetable.trains:
        for i, stop in enumerate(train.stops):
            # entry into both the platform and the outbound segment is the
            # departure from the stop; scheduled entry = sched_departure
            if stop.platform_resource:
                entries.append((stop.sched_departure, train.train_id, stop.platform_resource, i))
            if stop.outbound_segment:
                entries.append((stop.sched_departure, train.train_id, stop.outbound_segment, i))
    return entries


def build_resource_plan(timetable: Timetable) -> ResourcePlan:
    """Order resource usage by scheduled entry time and derive a processing order."""
    violations = validate_timetable(timetable)
    if violations:
        raise ModelError("invalid timetable: " + "; ".join(violations))

    queues: dict[str, list[tuple[str, int]]] = {}
    for sched, train_id, resource_id, stop_index in sorted(_scheduled_entry(timetable)):
        queues.setdefault(resource_id, []).append((train_id, stop_index))
    return ResourcePlan(queues=queues, topo_order=_processing_order(timetable, queues))


def _processing_order(
    timetable: Timetable, queues: dict[str, list[tuple[str, int]]]
) -> list[tuple[str, int]]:
    # Dependency graph over departure events (train_id, stop_index):
    # each stop depends on the previous stop of the same train and on the
    # previous scheduled user of every resource it enters.
    nodes = [(t.train_id, i) for t in timetable.trains for i in range(len(t.stops))]
    succ: dict[tuple[str, int], list[tuple[str, int]]] = {n: [] for n in nodes}
    indeg = {n: 0 for n in nodes}
    for train in timetable.trains:
        for i in range(1, len(train.stops)):
            succ[(train.train_id, i - 1)].append((train.train_id, i))
            indeg[(train.train_id, i)] += 1
    for order in queues.values():
        for prev, cur in zip(order, order[1:]):
            succ[prev].append(cur)
            indeg[cur] += 1

    ready = deque(n for n in nodes if indeg[n] == 0)
    topo: list[tuple[str, int]] = []
    while ready:
        n = ready.popleft()
        topo.append(n)
        for m in succ[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                ready.append(m)
    if len(topo) != len(nodes):
        stuck = sorted(n for n in nodes if indeg[n] > 0)
        raise SimulationError(f"cyclic resource dependency involving {stuck[:8]}")
    return topo


def _draw_seed(master_seed: int, run_index: int, train_id: str, stop_index: int, tag: str) -> bytes:
    """Stable per-draw key: blake2b over the identifying tuple.

    Keying by (master_seed, run_index, train_id, stop_index) makes sampling
    independent of iteration order.
    """
    key = f"{master_seed}|{run_index}|{train_id}|{stop_index}|{tag}".encode()
    return hashlib.blake2b(key, digest_size=16).digest()


def _sample_magnitude(spec, rng: random.Random) -> int:
    if isinstance(spec, Exponential):
        value = rng.expovariate(1.0 / spec.mean_seconds)
    elif isinstance(spec, LogNormal):
        value = rng.lognormvariate(spec.mu, spec.sigma)
    elif isinstance(spec, Empirical):
        values = [v for v, _ in spec.outcomes]
        weights = [w for _, w in spec.outcomes]
        value = rng.choices(values, weights=weights, k=1)[0]
    else:
        raise ModelError(f"unknown magnitude spec {spec!r}")
    return max(1, math.ceil(value))


def sample_primary_delays(
    timetable: Timetable,
    delay_config: DelayConfig,
    run_index: int,
    master_seed: int,
) -> list[PrimaryDelayEvent]:
    """Bernoulli occurrence per (train, stop); magnitudes rounded up to >= 1 s."""
    events: list[PrimaryDelayEvent] = []
    for train in timetable.trains:
        rule = delay_config.rule_for(train.category)
        if rule.per_stop_probability == 0.0:
            continue
        for i in range(len(train.stops)):
            digest = _draw_seed(master_seed, run_index, train.train_id, i, "primary")
            # first 8 bytes decide occurrence, second 8 seed the magnitude draw
            u = int.from_bytes(digest[:8], "big") / 2**64
            if u < rule.per_stop_probability:
                rng = random.Random(int.from_bytes(digest[8:], "big"))
                delay = _sample_magnitude(rule.magnitude, rng)
                events.append(PrimaryDelayEvent(train.train_id, i, delay, run_index))
    return events


def _jitter(params: SimParams, master_seed: int, run_index: int, train_id: str, stop_index: int) -> int:
    if params.runtime_jitter == 0:
        return 0
    digest = _draw_seed(master_seed, run_index, train_id, stop_index, "jitter")
    u = int.from_bytes(digest[:8], "big") / 2**64
    return round((2.0 * u - 1.0) * params.runtime_jitter)


def simulate_run(
    timetable: Timetable,
    plan: ResourcePlan,
    primary_events: list[PrimaryDelayEvent],
    params: SimParams,
    run_index: int,
    master_seed: int = 0,
) -> RunResult:
    """Propagate one day deterministically; pure function of its inputs."""
    trains = {t.train_id: t for t in timetable.trains}
    headway = {r.resource_id: r.min_headway for r in timetable.resources}
    primary: dict[tuple[str, int], int] = {}
    for ev in primary_events:
        primary[(ev.train_id, ev.stop_index)] = primary.get((ev.train_id, ev.stop_index), 0) + ev.delay

    # position of each (train, stop) in each resource queue, for predecessor lookup
    queue_pos: dict[tuple[str, str, int], int] = {}
    for rid, order in plan.queues.items():
        for pos, (tid, i) in enumerate(order):
            queue_pos[(rid, tid, i)] = pos

    arr: dict[tuple[str, int], int] = {}
    dep: dict[tuple[str, int], int] = {}
    attributions: list[Attribution] = []
    use_jitter = params.runtime_jitter > 0

    for train_id, i in plan.topo_order:
        train = trains[train_id]
        stop = train.stops[i]
        if i == 0:
            arr[(train_id, 0)] = stop.arrival
        actual_arr = arr[(train_id, i)]

        sched_dwell = stop.sched_departure - stop.arrival
        # compressible dwell, never beyond schedule (keeps the undisturbed day exact)
        min_dwell = min(sched_dwell, max(params.min_dwell_floor,
                                         round(params.min_dwell_fraction * sched_dwell)))
        candidate = max(stop.sched_departure, actual_arr + min_dwell) + primary.get((train_id, i), 0)

        actual_dep = candidate
        blocking: tuple[str, str] | None = None  # (causer, resource_id)
        for rid in (stop.platform_resource, stop.outbound_segment):
            if not rid:
                continue
            pos = queue_pos[(rid, train_id, i)]
            if pos == 0:
                continue
            prev_tid, prev_i = plan.queues[rid][pos - 1]
            # never enforce more separation than the schedule itself provides:
            # an undisturbed day then reproduces the schedule exactly
            sched_gap = stop.sched_departure - trains[prev_tid].stops[prev_i].sched_departure
            required = dep[(prev_tid, prev_i)] + min(headway[rid], sched_gap)
            if required > actual_dep:
                actual_dep = required
                blocking = (prev_tid, rid)
        if actual_dep > candidate:
            assert blocking is not None
            attributions.append(Attribution(
                run_index=run_index,
                causer=blocking[0],
                sufferer=train_id,
                resource_id=blocking[1],
                seconds=actual_dep - candidate,
                sufferer_stop_index=i,
            ))
        dep[(train_id, i)] = actual_dep

        if i + 1 < len(train.stops):
            nxt = train.stops[i + 1]
            sched_runtime = nxt.arrival - stop.sched_departure
            if actual_dep > stop.sched_departure:
                runtime = math.ceil(sched_runtime * (1.0 - params.recovery_allowance))
            else:
                runtime = sched_runtime
            if use_jitter:
                runtime = max(0, runtime + _jitter(params, master_seed, run_index, train_id, i))
                arr[(train_id, i + 1)] = max(actual_dep, actual_dep + runtime)
            else:
                # floored at schedule: the base model never runs early, which
                # also makes arrivals monotone in the primary delays
                arr[(train_id, i + 1)] = max(nxt.arrival, actual_dep + runtime)

    actual_times = {
        t.train_id: [(arr[(t.train_id, i)], dep[(t.train_id, i)]) for i in range(len(t.stops))]
        for t in timetable.trains
    }
    return RunResult(
        run_index=run_index,
        actual_times=actual_times,
        primary_events=tuple(sorted(primary_events, key=lambda e: (e.train_id, e.stop_index))),
        attributions=tuple(attributions),
    )


def run_ensemble(
    timetable: Timetable,
    delay_config: DelayConfig,
    params: SimParams,
    n_runs: int,
    master_seed: int,
    ensemble_id: str = "",
) -> Ensemble:
    if n_runs < 1:
        raise ModelError("n_runs must be >= 1")
    plan = build_resource_plan(timetable)
    runs = []
    for k in range(n_runs):
        events = sample_primary_delays(timetable, delay_config, k, master_seed)
        try:
            runs.append(simulate_run(timetable, plan, events, params, k, master_seed))
        except SimulationError as exc:
            raise SimulationError(f"run {k}: {exc}") from exc
    return Ensemble(
        ensemble_id=ensemble_id or f"ens-{master_seed}-{n_runs}",
        timetable=timetable,
        delay_config=delay_config,
        sim_params=params,
        master_seed=master_seed,
        runs=tuple(runs),
    )
