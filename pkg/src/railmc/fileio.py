"""File formats: timetable CSV, ensemble document, table exports.

All writers emit byte-stable output for identical inputs: fields are
ordered, numbers are plain decimal text, and nothing timestamped goes in
the payload body. The ensemble document is line-oriented (header, one
line per run, checksum trailer) so runs stream in index order.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from typing import Sequence

from .metrics import (
    CATEGORY_LABELS,
    AffectMetricCell,
    CaseMeta,
    ColumnSpec,
    FrequencyMetricCell,
    MetricTable,
    ProfileMetricCell,
    ScalarMetricCell,
    Summary,
    median_value,
)
from .model import (
    Attribution,
    DelayConfig,
    DelayRule,
    Empirical,
    Ensemble,
    Exponential,
    LogNormal,
    ModelError,
    PrimaryDelayEvent,
    Resource,
    RunResult,
    SimParams,
    StationStop,
    Timetable,
    TrainService,
    format_clock,
    parse_clock,
    validate_timetable,
)

ENSEMBLE_FORMAT_VERSION = 1

STOP_COLUMNS = [
    "train_id", "category", "stop_seq", "station_id", "sched_arrival",
    "sched_departure", "platform_resource", "outbound_segment", "passenger_load",
]
RESOURCE_COLUMNS = ["resource_id", "kind", "min_headway_seconds"]
RESOURCE_SECTION = "[resources]"


class FileFormatError(ValueError):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# timetable CSV (stop rows, then a [resources] section)


def parse_timetable(data: bytes) -> Timetable:
    text = data.decode("utf-8")
    lines = text.splitlines()
    try:
        split = lines.index(RESOURCE_SECTION)
    except ValueError:
        raise FileFormatError(f"missing {RESOURCE_SECTION} section") from None

    stop_rows = list(csv.DictReader(lines[:split]))
    resource_rows = list(csv.DictReader(lines[split + 1:]))

    resources = []
    for idx, row in enumerate(resource_rows, start=split + 3):
        try:
            resources.append(Resource(
                resource_id=row["resource_id"],
                kind=row["kind"],
                min_headway=int(row["min_headway_seconds"]),
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise FileFormatError(f"line {idx}: bad resource row ({exc})") from None

    by_train: dict[str, list[tuple[int, int, StationStop]]] = {}
    categories: dict[str, str] = {}
    for idx, row in enumerate(stop_rows, start=2):
        def col(name: str, optional: bool = False) -> str | None:
            value = (row.get(name) or "").strip()
            if not value and not optional:
                raise FileFormatError(f"line {idx}: missing column {name}")
            return value or None

        try:
            train_id = col("train_id")
            seq = int(col("stop_seq"))
            arr_text = col("sched_arrival", optional=True)
            dep = parse_clock(col("sched_departure"))
            arr = parse_clock(arr_text) if arr_text else None
            load_text = col("passenger_load", optional=True)
            stop = StationStop(
                station_id=col("station_id"),
                sched_arrival=arr,
                sched_departure=dep,
                platform_resource=col("platform_resource", optional=True),
                outbound_segment=col("outbound_segment", optional=True),
                passenger_load=int(load_text) if load_text else None,
            )
        except FileFormatError:
            raise
        except ModelError as exc:
            raise FileFormatError(f"line {idx}: {exc}") from None
        except (TypeError, ValueError) as exc:
            raise FileFormatError(f"line {idx}: {exc}") from None
        categories[train_id] = col("category") or ""
        entries = by_train.setdefault(train_id, [])
        if any(s == seq for s, _, _ in entries):
            raise FileFormatError(f"line {idx}: duplicate stop_seq {seq} for train {train_id}")
        entries.append((seq, idx, stop))

    trains = []
    for train_id, entries in by_train.items():
        entries.sort(key=lambda e: e[0])
        trains.append(TrainService(
            train_id=train_id,
            category=categories[train_id],
            stops=tuple(stop for _, _, stop in entries),
        ))
    trains.sort(key=lambda t: t.train_id)
    timetable = Timetable(trains=tuple(trains), resources=tuple(resources))
    violations = validate_timetable(timetable)
    if violations:
        raise FileFormatError("invalid timetable: " + "; ".join(violations))
    return timetable


def write_timetable(timetable: Timetable) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(STOP_COLUMNS)
    for train in timetable.trains:
        for seq, stop in enumerate(train.stops, start=1):
            writer.writerow([
                train.train_id,
                train.category,
                seq,
                stop.station_id,
                format_clock(stop.sched_arrival) if stop.sched_arrival is not None else "",
                format_clock(stop.sched_departure),
                stop.platform_resource or "",
                stop.outbound_segment or "",
                stop.passenger_load if stop.passenger_load is not None else "",
            ])
    out.write(RESOURCE_SECTION + "\n")
    writer.writerow(RESOURCE_COLUMNS)
    for r in timetable.resources:
        writer.writerow([r.resource_id, r.kind, r.min_headway])
    return out.getvalue().encode("utf-8")


# ---------------------------------------------------------------------------
# config / params JSON


def magnitude_to_dict(m) -> dict:
    if isinstance(m, Exponential):
        return {"kind": "exponential", "mean_seconds": m.mean_seconds}
    if isinstance(m, LogNormal):
        return {"kind": "lognormal", "mu": m.mu, "sigma": m.sigma}
    if isinstance(m, Empirical):
        return {"kind": "empirical", "outcomes": [list(o) for o in m.outcomes]}
    raise ModelError(f"unknown magnitude {m!r}")


def magnitude_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "exponential":
        return Exponential(mean_seconds=float(d["mean_seconds"]))
    if kind == "lognormal":
        return LogNormal(mu=float(d["mu"]), sigma=float(d["sigma"]))
    if kind == "empirical":
        return Empirical(outcomes=tuple((float(v), float(w)) for v, w in d["outcomes"]))
    raise FileFormatError(f"unknown magnitude kind {kind!r}")


def delay_config_to_dict(cfg: DelayConfig) -> dict:
    return {"rules": [
        {
            "selector": r.selector,
            "per_stop_probability": r.per_stop_probability,
            "magnitude": magnitude_to_dict(r.magnitude),
        }
        for r in cfg.rules
    ]}


def delay_config_from_dict(d: dict) -> DelayConfig:
    try:
        rules = tuple(
            DelayRule(
                selector=r["selector"],
                per_stop_probability=float(r["per_stop_probability"]),
                magnitude=magnitude_from_dict(r["magnitude"]),
            )
            for r in d["rules"]
        )
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"bad delay config: {exc}") from None
    return DelayConfig(rules=rules)


def sim_params_to_dict(p: SimParams) -> dict:
    return {
        "recovery_allowance": p.recovery_allowance,
        "min_dwell_fraction": p.min_dwell_fraction,
        "min_dwell_floor": p.min_dwell_floor,
        "runtime_jitter": p.runtime_jitter,
    }


def sim_params_from_dict(d: dict) -> SimParams:
    return SimParams(
        recovery_allowance=float(d.get("recovery_allowance", 0.05)),
        min_dwell_fraction=float(d.get("min_dwell_fraction", 0.5)),
        min_dwell_floor=int(d.get("min_dwell_floor", 30)),
        runtime_jitter=int(d.get("runtime_jitter", 0)),
    )


def timetable_to_dict(tt: Timetable) -> dict:
    return {
        "trains": [
            {
                "train_id": t.train_id,
                "category": t.category,
                "stops": [
                    {
                        "station_id": s.station_id,
                        "sched_arrival": s.sched_arrival,
                        "sched_departure": s.sched_departure,
                        "platform_resource": s.platform_resource,
                        "outbound_segment": s.outbound_segment,
                        "passenger_load": s.passenger_load,
                    }
                    for s in t.stops
                ],
            }
            for t in tt.trains
        ],
        "resources": [
            {"resource_id": r.resource_id, "kind": r.kind, "min_headway": r.min_headway}
            for r in tt.resources
        ],
    }


def timetable_from_dict(d: dict) -> Timetable:
    trains = tuple(
        TrainService(
            train_id=t["train_id"],
            category=t["category"],
            stops=tuple(
                StationStop(
                    station_id=s["station_id"],
                    sched_arrival=s["sched_arrival"],
                    sched_departure=s["sched_departure"],
                    platform_resource=s.get("platform_resource"),
                    outbound_segment=s.get("outbound_segment"),
                    passenger_load=s.get("passenger_load"),
                )
                for s in t["stops"]
            ),
        )
        for t in d["trains"]
    )
    resources = tuple(
        Resource(r["resource_id"], r["kind"], r["min_headway"]) for r in d["resources"]
    )
    return Timetable(trains=trains, resources=resources)


# ---------------------------------------------------------------------------
# ensemble document


def write_ensemble(ensemble: Ensemble) -> bytes:
    header = _dumps({
        "format_version": ENSEMBLE_FORMAT_VERSION,
        "ensemble_id": ensemble.ensemble_id,
        "master_seed": ensemble.master_seed,
        "n_runs": ensemble.n_runs,
        "timetable": timetable_to_dict(ensemble.timetable),
        "delay_config": delay_config_to_dict(ensemble.delay_config),
        "sim_params": sim_params_to_dict(ensemble.sim_params),
    })
    lines = [header]
    for run in ensemble.runs:
        lines.append(_dumps({
            "run_index": run.run_index,
            "actual_times": {tid: [list(pair) for pair in times]
                             for tid, times in run.actual_times.items()},
            "primary_events": [[e.train_id, e.stop_index, e.delay] for e in run.primary_events],
            "attributions": [
                [a.causer, a.sufferer, a.resource_id, a.seconds, a.sufferer_stop_index]
                for a in run.attributions
            ],
        }))
    body = ("\n".join(lines) + "\n").encode("utf-8")
    checksum = hashlib.sha256(body).hexdigest()
    return body + _dumps({"checksum": checksum}).encode("utf-8") + b"\n"


def read_ensemble(data: bytes) -> Ensemble:
    text = data.decode("utf-8")
    lines = text.splitlines()
    if len(lines) < 3:
        raise FileFormatError("truncated ensemble document")
    try:
        trailer = json.loads(lines[-1])
    except json.JSONDecodeError:
        raise FileFormatError("truncated ensemble document: missing checksum trailer") from None
    if "checksum" not in trailer:
        raise FileFormatError("truncated ensemble document: missing checksum trailer")
    body = ("\n".join(lines[:-1]) + "\n").encode("utf-8")
    if hashlib.sha256(body).hexdigest() != trailer["checksum"]:
        raise FileFormatError("checksum mismatch: document corrupted")

    header = json.loads(lines[0])
    version = header.get("format_version")
    if version != ENSEMBLE_FORMAT_VERSION:
        raise FileFormatError(
            f"unsupported format_version {version!r} (expected {ENSEMBLE_FORMAT_VERSION})")
    n_runs = header["n_runs"]
    run_lines = lines[1:-1]
    if len(run_lines) != n_runs:
        raise FileFormatError(f"expected {n_runs} runs, found {len(run_lines)}")

    runs = []
    for line in run_lines:
        d = json.loads(line)
        k = d["run_index"]
        runs.append(RunResult(
            run_index=k,
            actual_times={tid: [(a, dep) for a, dep in times]
                          for tid, times in d["actual_times"].items()},
            primary_events=tuple(
                PrimaryDelayEvent(tid, i, delay, k) for tid, i, delay in d["primary_events"]
            ),
            attributions=tuple(
                Attribution(k, causer, sufferer, rid, seconds, stop_index)
                for causer, sufferer, rid, seconds, stop_index in d["attributions"]
            ),
        ))
    return Ensemble(
        ensemble_id=header["ensemble_id"],
        timetable=timetable_from_dict(header["timetable"]),
        delay_config=delay_config_from_dict(header["delay_config"]),
        sim_params=sim_params_from_dict(header["sim_params"]),
        master_seed=header["master_seed"],
        runs=tuple(runs),
    )


# ---------------------------------------------------------------------------
# table exports


def _cell_to_dict(cell) -> dict:
    if isinstance(cell, ScalarMetricCell):
        return {
            "family": "scalar",
            "per_run_values": list(cell.per_run_values),
            "summary": {
                "median": cell.summary.median,
                "mean": cell.summary.mean,
                "std_dev": cell.summary.std_dev,
                "p80": cell.summary.p80,
            },
        }
    if isinstance(cell, ProfileMetricCell):
        return {
            "family": "profile",
            "per_run_series": [[list(pt) for pt in run] for run in cell.per_run_series],
            "binned_average": list(cell.binned_average),
        }
    if isinstance(cell, FrequencyMetricCell):
        return {
            "family": "frequency",
            "per_run_counts": [list(run) for run in cell.per_run_counts],
            "average_counts": list(cell.average_counts),
        }
    if isinstance(cell, AffectMetricCell):
        return {
            "family": "affect",
            "direction": cell.direction,
            "per_run_breakdown": [[list(pair) for pair in run] for run in cell.per_run_breakdown],
        }
    raise ModelError(f"unknown cell type {type(cell).__name__}")


def _cell_from_dict(d: dict):
    family = d["family"]
    if family == "scalar":
        s = d["summary"]
        return ScalarMetricCell(
            per_run_values=tuple(d["per_run_values"]),
            summary=Summary(s["median"], s["mean"], s["std_dev"], s["p80"]),
        )
    if family == "profile":
        return ProfileMetricCell(
            per_run_series=tuple(tuple(tuple(pt) for pt in run) for run in d["per_run_series"]),
            binned_average=tuple(d["binned_average"]),
        )
    if family == "frequency":
        return FrequencyMetricCell(
            per_run_counts=tuple(tuple(run) for run in d["per_run_counts"]),
            average_counts=tuple(d["average_counts"]),
        )
    if family == "affect":
        return AffectMetricCell(
            direction=d["direction"],
            per_run_breakdown=tuple(
                tuple((tid, sec) for tid, sec in run) for run in d["per_run_breakdown"]
            ),
        )
    raise FileFormatError(f"unknown cell family {family!r}")


def export_table(table: MetricTable, format: str = "delimited") -> bytes:
    if format == "structured":
        return _dumps({
            "case_kind": table.case_kind,
            "case_ids": list(table.case_ids),
            "n_runs": table.n_runs,
            "columns": [
                {"metric_id": c.metric_id, "family": c.family, "axis_range": list(c.axis_range)}
                for c in table.columns
            ],
            "case_meta": {
                cid: {"category": m.category,
                      "active_span": list(m.active_span) if m.active_span else None}
                for cid, m in table.case_meta.items()
            },
            "cells": {
                cid: {c.metric_id: _cell_to_dict(table.cell(cid, c.metric_id))
                      for c in table.columns}
                for cid in table.case_ids
            },
        }).encode("utf-8") + b"\n"
    if format != "delimited":
        raise ModelError(f"unknown export format {format!r}")

    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    header = ["case_id"]
    for c in table.columns:
        if c.family == "scalar":
            header += [f"{c.metric_id}_{s}" for s in ("median", "mean", "std_dev", "p80")]
        elif c.family == "frequency":
            header += [f"{c.metric_id}_avg_{label}" for label in CATEGORY_LABELS]
        elif c.family == "profile":
            header += [f"{c.metric_id}_mean"]
        elif c.family == "affect":
            header += [f"{c.metric_id}_median_total"]
    writer.writerow(header)
    for cid in table.case_ids:
        row: list = [cid]
        for c in table.columns:
            cell = table.cell(cid, c.metric_id)
            if c.family == "scalar":
                row += [cell.summary.median, cell.summary.mean,
                        cell.summary.std_dev, cell.summary.p80]
            elif c.family == "frequency":
                row += list(cell.average_counts)
            elif c.family == "profile":
                vals = [l for run in cell.per_run_series for _, l in run]
                row += [sum(vals) / len(vals) if vals else 0.0]
            elif c.family == "affect":
                row += [median_value(cell.per_run_totals())]
        writer.writerow(row)
    return out.getvalue().encode("utf-8")


def import_table(data: bytes) -> MetricTable:
    """Rebuild a MetricTable from a structured export, cell-identical."""
    d = json.loads(data.decode("utf-8"))
    columns = tuple(
        ColumnSpec(c["metric_id"], c["family"], tuple(c["axis_range"])) for c in d["columns"]
    )
    cells = {
        (cid, mid): _cell_from_dict(cd)
        for cid, by_metric in d["cells"].items()
        for mid, cd in by_metric.items()
    }
    meta = {
        cid: CaseMeta(
            category=m["category"],
            active_span=tuple(m["active_span"]) if m["active_span"] else None,
        )
        for cid, m in d["case_meta"].items()
    }
    return MetricTable(
        case_kind=d["case_kind"],
        case_ids=tuple(d["case_ids"]),
        columns=columns,
        cells=cells,
        case_meta=meta,
        n_runs=d["n_runs"],
    )
