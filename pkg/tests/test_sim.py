import random

import pytest

from railmc.model import (
    DelayConfig,
    DelayRule,
    Exponential,
    ModelError,
    PrimaryDelayEvent,
    Resource,
    SimParams,
    StationStop,
    Timetable,
    TrainService,
)
from railmc.sim import (
    SimulationError,
    build_resource_plan,
    run_ensemble,
    sample_primary_delays,
    simulate_run,
)

from conftest import (
    fixed_delay_config,
    make_two_train_timetable,
    random_corridor_timetable,
    zero_delay_config,
)


class TestResourcePlan:
    def test_schedule_order(self, two_train_timetable):
        plan = build_resource_plan(two_train_timetable)
        assert [tid for tid, _ in plan.queues["SEG1"]] == ["1A01", "2B02"]

    def test_tie_break_lexicographic(self):
        tt = make_two_train_timetable(b_departure=28800)  # same entry time as 1A01
        plan = build_resource_plan(tt)
        assert [tid for tid, _ in plan.queues["SEG1"]] == ["1A01", "2B02"]

    def test_train_without_resources_absent(self):
        loner = TrainService("LONE", "c", stops=(
            StationStop("S9", sched_departure=1000),
            StationStop("S8", sched_arrival=2000, sched_departure=2100),
        ))
        base = make_two_train_timetable()
        plan = build_resource_plan(Timetable(base.trains + (loner,), base.resources))
        assert all("LONE" != tid for q in plan.queues.values() for tid, _ in q)

    def test_rejects_invalid_timetable(self):
        tt = Timetable(
            trains=(TrainService("X", "c", stops=(
                StationStop("S1", sched_departure=100, outbound_segment="NOPE"),
                StationStop("S2", sched_arrival=500, sched_departure=600),
            )),),
            resources=(),
        )
        with pytest.raises(ModelError):
            build_resource_plan(tt)

    def test_crossing_trains_still_acyclic(self):
        # opposite traversal of two shared segments; scheduled-entry ordering
        # keeps the dependency graph acyclic
        a = TrainService("A", "c", stops=(
            StationStop("S1", sched_departure=100, outbound_segment="SEG_P"),
            StationStop("S2", sched_arrival=200, sched_departure=300, outbound_segment="SEG_Q"),
            StationStop("S3", sched_arrival=400, sched_departure=500),
        ))
        b = TrainService("B", "c", stops=(
            StationStop("S2", sched_departure=250, outbound_segment="SEG_Q"),
            StationStop("S1", sched_arrival=350, sched_departure=450, outbound_segment="SEG_P"),
            StationStop("S3", sched_arrival=550, sched_departure=650),
        ))
        tt = Timetable(trains=(a, b), resources=(
            Resource("SEG_P", "segment", 60), Resource("SEG_Q", "segment", 60)))
        plan = build_resource_plan(tt)
        assert len(plan.topo_order) == 6

    def test_cycle_detected(self, two_train_timetable):
        # valid timetables cannot produce cycles, so feed the topological step
        # an inconsistent queue directly to exercise the defensive error
        from railmc.sim import _processing_order

        queues = {"SEG1": [("2B02", 0), ("1A01", 0)], "SEG_X": [("1A01", 1), ("2B02", 0)]}
        # SEG1 says B0 before A0 ... A0 -> A1 ... SEG_X says A1 before B0: cycle
        with pytest.raises(SimulationError, match="cyclic"):
            _processing_order(two_train_timetable, queues)


class TestSamplePrimaryDelays:
    def test_zero_probability(self, two_train_timetable):
        assert sample_primary_delays(two_train_timetable, zero_delay_config(), 0, 42) == []

    def test_degenerate_distribution(self, two_train_timetable):
        events = sample_primary_delays(two_train_timetable, fixed_delay_config(1.0, 300.0), 0, 42)
        assert len(events) == 4  # every stop of both trains
        assert all(e.delay == 300 for e in events)

    def test_order_independence(self, two_train_timetable):
        # reversing train order in the timetable must not change any draw
        tt = two_train_timetable
        reversed_tt = Timetable(trains=tt.trains[::-1], resources=tt.resources)
        cfg = fixed_delay_config(0.5, 120.0)
        a = sorted(sample_primary_delays(tt, cfg, 3, 99), key=lambda e: (e.train_id, e.stop_index))
        b = sorted(sample_primary_delays(reversed_tt, cfg, 3, 99),
                   key=lambda e: (e.train_id, e.stop_index))
        assert a == b

    def test_statistical_oracle(self):
        # p = 0.1 over 1000 trains x 10 stops, exponential mean 180 s
        rng = random.Random(7)
        tt = random_corridor_timetable(rng, max_trains=2, max_stops=10)
        stations = 10
        runtimes = [300] * (stations - 1)
        trains = []
        for t in range(1000):
            dep = 6 * 3600 + t * 30
            stops = []
            for i in range(stations):
                arr = None if i == 0 else dep
                if i > 0:
                    dep = arr + 60
                stops.append(StationStop(f"S{i}", sched_arrival=arr, sched_departure=dep))
                dep += runtimes[i] if i < stations - 1 else 0
            trains.append(TrainService(f"T{t:04d}", "c", tuple(stops)))
        tt = Timetable(trains=tuple(trains), resources=())
        cfg = DelayConfig(rules=(DelayRule("*", 0.1, Exponential(mean_seconds=180.0)),))
        events = sample_primary_delays(tt, cfg, 0, 2024)
        n_draws = 1000 * 10
        expected = n_draws * 0.1
        sigma = (n_draws * 0.1 * 0.9) ** 0.5
        assert abs(len(events) - expected) <= 3 * sigma
        mean_mag = sum(e.delay for e in events) / len(events)
        assert abs(mean_mag - 180.0) <= 18.0

    def test_unmatched_category_errors(self, two_train_timetable):
        cfg = DelayConfig(rules=(DelayRule("freight", 0.5, Exponential(100.0)),))
        with pytest.raises(ModelError):
            sample_primary_delays(two_train_timetable, cfg, 0, 1)


class TestSimulateRun:
    def test_undisturbed_schedule(self, two_train_timetable, default_params):
        plan = build_resource_plan(two_train_timetable)
        result = simulate_run(two_train_timetable, plan, [], default_params, 0)
        for train in two_train_timetable.trains:
            for i, stop in enumerate(train.stops):
                arr, dep = result.actual_times[train.train_id][i]
                assert arr == stop.arrival
                assert dep == stop.sched_departure
        assert result.attributions == ()

    def test_headway_wait_attributed(self, default_params):
        # A delayed 300 s: enters SEG1 at 29100; B's own entry would be 29160,
        # 60 s behind, but headway 120 forces 29220 -> 60 s wait charged to A
        tt = make_two_train_timetable(b_departure=29160)
        plan = build_resource_plan(tt)
        events = [PrimaryDelayEvent("1A01", 0, 300, 0)]
        result = simulate_run(tt, plan, events, default_params, 0)
        assert result.actual_times["1A01"][0][1] == 29100
        assert result.actual_times["2B02"][0][1] == 29220
        assert len(result.attributions) == 1
        a = result.attributions[0]
        assert (a.causer, a.sufferer, a.seconds, a.resource_id) == ("1A01", "2B02", 60, "SEG1")

    def test_headway_already_satisfied(self, default_params):
        # B 180 s behind A's actual entry: 29100 + 180 = 29280 >= 29100 + 120
        tt = make_two_train_timetable(b_departure=29280)
        plan = build_resource_plan(tt)
        events = [PrimaryDelayEvent("1A01", 0, 300, 0)]
        result = simulate_run(tt, plan, events, default_params, 0)
        assert result.actual_times["2B02"][0][1] == 29280
        assert result.attributions == ()

    def test_no_early_departures(self, default_params):
        rng = random.Random(11)
        for _ in range(20):
            tt = random_corridor_timetable(rng, max_trains=10, max_stops=6)
            ens = run_ensemble(tt, fixed_delay_config(0.3, 240.0), default_params, 3, rng.random())
            for run in ens.runs:
                for train in tt.trains:
                    for i, stop in enumerate(train.stops):
                        assert run.actual_times[train.train_id][i][1] >= stop.sched_departure

    def test_times_non_decreasing_with_jitter(self):
        params = SimParams(runtime_jitter=600)
        rng = random.Random(13)
        tt = random_corridor_timetable(rng, max_trains=10, max_stops=6)
        ens = run_ensemble(tt, fixed_delay_config(0.3, 240.0), params, 3, 5)
        for run in ens.runs:
            for train in tt.trains:
                prev = None
                for arr, dep in run.actual_times[train.train_id]:
                    assert dep >= arr
                    if prev is not None:
                        assert arr >= prev
                    prev = dep

    def test_jitter_allows_early_arrival(self):
        params = SimParams(runtime_jitter=120)
        tt = make_two_train_timetable()
        plan = build_resource_plan(tt)
        early = False
        for k in range(50):
            run = simulate_run(tt, plan, [], params, k, master_seed=7)
            for train in tt.trains:
                arr = run.actual_times[train.train_id][1][0]
                if arr < train.stops[1].arrival:
                    early = True
        assert early


class TestRunEnsemble:
    def test_single_run(self, two_train_timetable, default_params):
        ens = run_ensemble(two_train_timetable, zero_delay_config(), default_params, 1, 1)
        assert ens.n_runs == 1

    def test_zero_runs_rejected(self, two_train_timetable, default_params):
        with pytest.raises(ModelError):
            run_ensemble(two_train_timetable, zero_delay_config(), default_params, 0, 1)

    def test_determinism(self, two_train_timetable, default_params):
        cfg = fixed_delay_config(0.5, 120.0)
        a = run_ensemble(two_train_timetable, cfg, default_params, 5, 42)
        b = run_ensemble(two_train_timetable, cfg, default_params, 5, 42)
        assert a == b

    def test_different_seeds_differ(self):
        rng = random.Random(3)
        tt = random_corridor_timetable(rng, max_trains=20, max_stops=8)
        cfg = fixed_delay_config(0.5, 120.0)
        params = SimParams()
        a = run_ensemble(tt, cfg, params, 10, 1)
        b = run_ensemble(tt, cfg, params, 10, 2)
        assert any(
            ra.primary_events != rb.primary_events for ra, rb in zip(a.runs, b.runs)
        )

    def test_run_independence(self, default_params):
        # re-simulating a subset of run indices reproduces those runs exactly
        rng = random.Random(5)
        tt = random_corridor_timetable(rng, max_trains=10, max_stops=6)
        cfg = fixed_delay_config(0.3, 180.0)
        full = run_ensemble(tt, cfg, default_params, 6, 77)
        plan = build_resource_plan(tt)
        for k in [0, 2, 5]:
            events = sample_primary_delays(tt, cfg, k, 77)
            redo = simulate_run(tt, plan, events, default_params, k, 77)
            assert redo == full.runs[k]

    def test_conservation(self, default_params):
        rng = random.Random(17)
        for _ in range(10):
            tt = random_corridor_timetable(rng, max_trains=15, max_stops=8)
            ens = run_ensemble(tt, fixed_delay_config(0.4, 300.0), default_params, 4,
                               rng.randint(0, 2**32))
            for run in ens.runs:
                ledger_total = sum(a.seconds for a in run.attributions)
                caused = sum(a.seconds for a in run.attributions)
                suffered = sum(a.seconds for a in run.attributions)
                per_train_caused = {}
                per_train_suffered = {}
                for a in run.attributions:
                    per_train_caused[a.causer] = per_train_caused.get(a.causer, 0) + a.seconds
                    per_train_suffered[a.sufferer] = per_train_suffered.get(a.sufferer, 0) + a.seconds
                assert sum(per_train_caused.values()) == ledger_total
                assert sum(per_train_suffered.values()) == ledger_total
