import random

import pytest

from railmc.model import (
    DelayConfig,
    DelayRule,
    Empirical,
    Resource,
    SimParams,
    StationStop,
    Timetable,
    TrainService,
)


def make_two_train_timetable(b_departure: int = 29160) -> Timetable:
    """Trains 1A01 and 2B02 share SEG1 (headway 120 s) between S1 and S2.

    1A01 departs S1 at 08:00:00; 2B02 at `b_departure` (default 08:06:00).
    """
    a = TrainService(
        train_id="1A01",
        category="express",
        stops=(
            StationStop(station_id="S1", sched_departure=28800, outbound_segment="SEG1"),
            StationStop(station_id="S2", sched_arrival=29400, sched_departure=29460),
        ),
    )
    b = TrainService(
        train_id="2B02",
        category="stopper",
        stops=(
            StationStop(station_id="S1", sched_departure=b_departure, outbound_segment="SEG1"),
            StationStop(
                station_id="S2",
                sched_arrival=b_departure + 600,
                sched_departure=b_departure + 660,
            ),
        ),
    )
    return Timetable(
        trains=(a, b),
        resources=(Resource("SEG1", "segment", 120),),
    )


def random_corridor_timetable(rng: random.Random, max_trains: int = 50,
                              max_stops: int = 10) -> Timetable:
    """Valid corridor timetable with shared segments and no scheduled overtaking.

    Runtimes and dwells are properties of corridor position, so scheduled
    resource entry order is consistent across segments (cycle-free).
    """
    n_stations = rng.randint(3, max(3, max_stops))
    runtimes = [rng.randint(120, 600) for _ in range(n_stations - 1)]
    dwells = [rng.randint(30, 120) for _ in range(n_stations)]
    resources = tuple(
        Resource(f"SEG{i}", "segment", rng.randint(60, 300)) for i in range(n_stations - 1)
    )
    trains = []
    n_trains = rng.randint(2, max(2, max_trains))
    for t in range(n_trains):
        first = rng.randint(0, n_stations - 2)
        last = rng.randint(first + 1, n_stations - 1)
        dep = rng.randint(6 * 3600, 20 * 3600)
        stops = []
        for i in range(first, last + 1):
            arr = None if i == first else dep
            if i > first:
                dep = arr + dwells[i]
            stops.append(StationStop(
                station_id=f"S{i}",
                sched_arrival=arr,
                sched_departure=dep,
                outbound_segment=f"SEG{i}" if i < last else None,
            ))
            if i < last:
                dep = dep + runtimes[i]
        trains.append(TrainService(train_id=f"T{t:03d}", category="mixed", stops=tuple(stops)))
    return Timetable(trains=tuple(trains), resources=resources)


def zero_delay_config() -> DelayConfig:
    return DelayConfig(rules=(
        DelayRule(selector="*", per_stop_probability=0.0,
                  magnitude=Empirical(outcomes=((60.0, 1.0),))),
    ))


def fixed_delay_config(probability: float = 1.0, seconds: float = 300.0) -> DelayConfig:
    return DelayConfig(rules=(
        DelayRule(selector="*", per_stop_probability=probability,
                  magnitude=Empirical(outcomes=((seconds, 1.0),))),
    ))


@pytest.fixture
def two_train_timetable() -> Timetable:
    return make_two_train_timetable()


@pytest.fixture
def default_params() -> SimParams:
    return SimParams()
