#!/usr/bin/env python3
"""Capture HTTP service payloads as JSON fixtures for the frontend tests.

The scenario: express 1A01 is delayed 300 s at every stop and knocks on to
stopper 2B02 through shared segment SEG1; 9Z99 runs an independent segment
two hours later and is never involved. Three runs, so high level-of-detail
charts have one mark per run in every family.

Run from the repository root with the railmc package installed:

    python3 frontend/scripts/capture_fixtures.py
"""
import json
from pathlib import Path

from fastapi.testclient import TestClient

from railmc.fileio import delay_config_to_dict, write_timetable
from railmc.model import (
    DelayConfig,
    DelayRule,
    Empirical,
    Resource,
    StationStop,
    Timetable,
    TrainService,
)
from railmc.server import create_app

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "test" / "fixtures"

METRICS = [
    "reactionary_suffered",
    "lateness_profile",
    "lateness_frequencies",
    "affecting_suffered",
]


def three_train_timetable() -> Timetable:
    a = TrainService("1A01", "express", (
        StationStop(station_id="S1", sched_departure=28800, outbound_segment="SEG1"),
        StationStop(station_id="S2", sched_arrival=29400, sched_departure=29460),
    ))
    b = TrainService("2B02", "stopper", (
        StationStop(station_id="S1", sched_departure=29160, outbound_segment="SEG1"),
        StationStop(station_id="S2", sched_arrival=29760, sched_departure=29820),
    ))
    c = TrainService("9Z99", "stopper", (
        StationStop(station_id="S3", sched_departure=36000, outbound_segment="SEG2"),
        StationStop(station_id="S4", sched_arrival=36600, sched_departure=36660),
    ))
    return Timetable(
        trains=(a, b, c),
        resources=(Resource("SEG1", "segment", 120), Resource("SEG2", "segment", 120)),
    )


def express_only_config() -> DelayConfig:
    return DelayConfig(rules=(
        DelayRule("express", 1.0, Empirical(outcomes=((300.0, 1.0),))),
        DelayRule("*", 0.0, Empirical(outcomes=((60.0, 1.0),))),
    ))


def main() -> None:
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    client = TestClient(create_app())

    resp = client.post("/timetables", content=write_timetable(three_train_timetable()))
    resp.raise_for_status()
    tid = resp.json()["timetable_id"]

    resp = client.post("/simulations", json={
        "timetable_id": tid,
        "config": delay_config_to_dict(express_only_config()),
        "params": {},
        "n_runs": 3,
        "seed": 4,
    })
    resp.raise_for_status()
    eid = resp.json()["ensemble_id"]

    base_request = {
        "ensemble_id": eid,
        "metric_ids": METRICS,
        "sort": {"column": "reactionary_suffered", "statistic": "median",
                 "order": "desc"},
    }
    fixtures = {
        "table_3runs.json": client.post("/tables", json=base_request),
        "table_filtered.json": client.post("/tables", json={
            **base_request, "filter": {"id_pattern": "0"}}),
        "table_brushed.json": client.post("/tables", json={
            **base_request, "filter": {"time_window": [28800, 30000]}}),
        "affecting_2B02.json": client.get(
            f"/ensembles/{eid}/cases/2B02/affecting",
            params={"direction": "suffers_delay_from"}),
        "histogram.json": client.get(f"/ensembles/{eid}/histogram",
                                     params={"bin_minutes": 30}),
    }
    for name, resp in fixtures.items():
        resp.raise_for_status()
        (FIXTURE_DIR / name).write_text(json.dumps(resp.json(), indent=2, sort_keys=True))
        print(f"wrote {name}")


if __name__ == "__main__":
    main()
