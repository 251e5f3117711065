"""HTTP service exposing timetables, simulation jobs and metric tables.

Stored objects are immutable and ids are content-derived, so every
response is deterministic given stored state and identical table
requests serialize byte-identically.
"""
from __future__ import annotations

import hashlib
import json
from typing import Optional

from fastapi import FastAPI, Request, Response
from pydantic import BaseModel, Field

from .fileio import (
    FileFormatError,
    delay_config_from_dict,
    parse_timetable,
    sim_params_from_dict,
)
from .metrics import (
    AffectMetricCell,
    FrequencyMetricCell,
    MetricTable,
    ProfileMetricCell,
    ScalarMetricCell,
    build_metric_table,
    decile_boundaries,
    filter_cases,
    presented_range,
    sample_for_render,
    sort_cases,
    temporal_histogram,
)
from .model import Ensemble, ModelError
from .report import _affect_median_breakdown
from .sim import SimulationError, run_ensemble

# synchronous simulation cap: runs x trains x stops
DESK_SCALE_CAP = 10_000_000

DEFAULT_MAX_ROWS = 2000
DEFAULT_MAX_RUNS = 500


class SortSpec(BaseModel):
    column: str
    statistic: str = "median"
    order: str = "desc"


class FilterSpec(BaseModel):
    id_pattern: Optional[str] = None
    categories: Optional[list[str]] = None
    time_window: Optional[tuple[int, int]] = None


class TableRequest(BaseModel):
    ensemble_id: str
    case_kind: str = "train"
    metric_ids: list[str] = Field(default_factory=lambda: ["reactionary_caused"])
    sort: Optional[SortSpec] = None
    filter: Optional[FilterSpec] = None
    scale_overrides: dict[str, tuple[float, float]] = Field(default_factory=dict)
    max_rows: int = DEFAULT_MAX_ROWS
    max_runs: int = DEFAULT_MAX_RUNS


class SimulationRequest(BaseModel):
    timetable_id: str
    config: dict
    params: dict = Field(default_factory=dict)
    n_runs: int = 1
    seed: int = 0


def _canonical_json(payload) -> Response:
    body = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return Response(content=body, media_type="application/json")


def _error(status: int, detail) -> Response:
    return Response(
        content=json.dumps({"detail": detail}),
        media_type="application/json",
        status_code=status,
    )


def _cell_summary(cell) -> dict:
    if isinstance(cell, ScalarMetricCell):
        s = cell.summary
        return {"median": s.median, "mean": s.mean, "std_dev": s.std_dev, "p80": s.p80}
    if isinstance(cell, ProfileMetricCell):
        return {"binned_average": list(cell.binned_average)}
    if isinstance(cell, FrequencyMetricCell):
        return {"average_counts": list(cell.average_counts)}
    if isinstance(cell, AffectMetricCell):
        return {
            "direction": cell.direction,
            "median_breakdown": [[tid, med] for tid, med in _affect_median_breakdown(cell)],
        }
    raise ModelError(f"unknown cell type {type(cell).__name__}")


def _cell_detail(cell, run_indices) -> dict:
    if isinstance(cell, ScalarMetricCell):
        return {"per_run_values": [cell.per_run_values[k] for k in run_indices]}
    if isinstance(cell, ProfileMetricCell):
        return {"per_run_series": [[list(pt) for pt in cell.per_run_series[k]]
                                   for k in run_indices]}
    if isinstance(cell, FrequencyMetricCell):
        return {"per_run_counts": [list(cell.per_run_counts[k]) for k in run_indices]}
    if isinstance(cell, AffectMetricCell):
        return {"per_run_breakdown": [[list(p) for p in cell.per_run_breakdown[k]]
                                      for k in run_indices]}
    raise ModelError(f"unknown cell type {type(cell).__name__}")


def create_app() -> FastAPI:
    app = FastAPI(title="railmc")
    app.state.timetables = {}
    app.state.ensembles = {}
    app.state.tables = {}  # (ensemble_id, case_kind, metric_ids) -> MetricTable

    def base_table(ensemble: Ensemble, case_kind: str, metric_ids: tuple[str, ...]) -> MetricTable:
        key = (ensemble.ensemble_id, case_kind, metric_ids)
        if key not in app.state.tables:
            app.state.tables[key] = build_metric_table(ensemble, case_kind, list(metric_ids))
        return app.state.tables[key]

    @app.post("/timetables")
    async def post_timetable(request: Request):
        body = await request.body()
        try:
            timetable = parse_timetable(body)
        except FileFormatError as exc:
            return _error(422, str(exc))
        tid = hashlib.sha256(body).hexdigest()[:16]
        app.state.timetables[tid] = timetable
        return _canonical_json({"timetable_id": tid})

    @app.post("/simulations")
    def post_simulation(req: SimulationRequest):
        timetable = app.state.timetables.get(req.timetable_id)
        if timetable is None:
            return _error(404, f"unknown timetable {req.timetable_id}")
        if req.n_runs < 1:
            return _error(422, "n_runs must be >= 1")
        n_stops = sum(len(t.stops) for t in timetable.trains)
        if req.n_runs * n_stops > DESK_SCALE_CAP:
            return _error(413, "request exceeds the synchronous desk-scale cap; "
                               "use the railmc CLI for batch simulation")
        try:
            config = delay_config_from_dict(req.config)
            params = sim_params_from_dict(req.params)
        except (FileFormatError, ModelError) as exc:
            return _error(422, str(exc))
        key = json.dumps(
            [req.timetable_id, req.config, req.params, req.n_runs, req.seed],
            sort_keys=True, separators=(",", ":"))
        eid = hashlib.sha256(key.encode()).hexdigest()[:16]
        if eid not in app.state.ensembles:
            try:
                ensemble = run_ensemble(timetable, config, params, req.n_runs, req.seed,
                                        ensemble_id=eid)
            except (ModelError, SimulationError) as exc:
                return _error(422, str(exc))
            app.state.ensembles[eid] = ensemble
        return _canonical_json({"ensemble_id": eid})

    @app.post("/tables")
    def post_table(req: TableRequest):
        ensemble = app.state.ensembles.get(req.ensemble_id)
        if ensemble is None:
            return _error(404, f"unknown ensemble {req.ensemble_id}")
        try:
            table = base_table(ensemble, req.case_kind, tuple(req.metric_ids))

            order = list(table.case_ids)
            decile_payload = None
            if req.sort is not None:
                order = sort_cases(table, req.sort.column, req.sort.statistic, req.sort.order)
                try:
                    decile_payload = {
                        "column": req.sort.column,
                        "statistic": req.sort.statistic,
                        "boundaries": decile_boundaries(table, req.sort.column,
                                                        req.sort.statistic),
                    }
                except ModelError:
                    decile_payload = None  # negative-valued column: no decile lines

            from dataclasses import replace

            view = replace(table, case_ids=tuple(order))
            if req.filter is not None:
                view = filter_cases(
                    view,
                    id_pattern=req.filter.id_pattern,
                    categories=req.filter.categories,
                    time_window=req.filter.time_window,
                )
            sample = sample_for_render(view, req.max_rows, req.max_runs)
        except ModelError as exc:
            return _error(422, str(exc))

        sampled_rows = set(sample.case_ids)
        columns = []
        for col in view.columns:
            rng = req.scale_overrides.get(col.metric_id)
            columns.append({
                "metric_id": col.metric_id,
                "family": col.family,
                "axis_range": list(rng) if rng else list(presented_range(col.axis_range)),
                "overridden": rng is not None,
            })
        cells = {}
        for cid in view.case_ids:
            row = {}
            for col in view.columns:
                cell = view.cell(cid, col.metric_id)
                payload = {"summary": _cell_summary(cell)}
                if cid in sampled_rows:
                    payload["detail"] = _cell_detail(cell, sample.run_indices)
                row[col.metric_id] = payload
            cells[cid] = row
        return _canonical_json({
            "ensemble_id": req.ensemble_id,
            "case_kind": view.case_kind,
            "case_order": list(view.case_ids),
            "columns": columns,
            "decile": decile_payload,
            "n_runs": view.n_runs,
            "sampling": {
                "row_stride": sample.row_stride,
                "run_stride": sample.run_stride,
                "run_indices": list(sample.run_indices),
            },
            "cells": cells,
        })

    @app.get("/ensembles/{ensemble_id}/cases/{case_id}/metrics/{metric_id}")
    def get_cell(ensemble_id: str, case_id: str, metric_id: str, case_kind: str = "train"):
        ensemble = app.state.ensembles.get(ensemble_id)
        if ensemble is None:
            return _error(404, f"unknown ensemble {ensemble_id}")
        try:
            table = base_table(ensemble, case_kind, (metric_id,))
        except ModelError as exc:
            return _error(422, str(exc))
        if case_id not in table.case_ids:
            return _error(404, f"unknown case {case_id}")
        cell = table.cell(case_id, metric_id)
        return _canonical_json({
            "case_id": case_id,
            "metric_id": metric_id,
            "family": table.column(metric_id).family,
            "summary": _cell_summary(cell),
            "detail": _cell_detail(cell, range(ensemble.n_runs)),
        })

    @app.get("/ensembles/{ensemble_id}/histogram")
    def get_histogram(ensemble_id: str, bin_minutes: int = 30):
        ensemble = app.state.ensembles.get(ensemble_id)
        if ensemble is None:
            return _error(404, f"unknown ensemble {ensemble_id}")
        try:
            bins = temporal_histogram(ensemble.timetable, bin_minutes)
        except ModelError as exc:
            return _error(400, str(exc))
        return _canonical_json({"bin_minutes": bin_minutes, "bins": bins})

    @app.get("/ensembles/{ensemble_id}/cases/{case_id}/affecting")
    def get_affecting(ensemble_id: str, case_id: str, direction: str = "suffers_delay_from"):
        ensemble = app.state.ensembles.get(ensemble_id)
        if ensemble is None:
            return _error(404, f"unknown ensemble {ensemble_id}")
        if direction not in ("causes_delay_to", "suffers_delay_from"):
            return _error(400, f"unknown direction {direction!r}")
        try:
            from .metrics import affecting_trains

            cell = affecting_trains(ensemble, case_id, direction)
        except ModelError as exc:
            return _error(404, str(exc))
        union: dict[str, list[list[int]]] = {}
        for k, run in enumerate(cell.per_run_breakdown):
            for tid, seconds in run:
                union.setdefault(tid, []).append([k, seconds])
        return _canonical_json({
            "case_id": case_id,
            "direction": direction,
            "trains": union,
            "involved": sorted(union),
        })

    return app
