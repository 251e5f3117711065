"""Composite lateness metrics over an ensemble, arranged case-by-variable.

Cases are trains or station stops; each column holds one of four metric
families (scalar, profile, frequency, affect) with per-run detail plus a
cross-run summary. Summaries use integer-exact conventions: median is the
lower of the two middle values for even run counts and percentiles are
nearest-rank.
"""
from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .model import Ensemble, ModelError, Timetable

CATEGORY_LABELS = ("early", "0-1min", "1-3min", "3-5min", "5-10min", "10-20min", "20+min")
# half-open upper bounds in seconds; "early" is lateness < 0
CATEGORY_BOUNDS = (0, 60, 180, 300, 600, 1200)
# scalarization midpoints for sorting frequency columns; 20+ pinned at 1500 s
CATEGORY_MIDPOINTS = (0.0, 30.0, 120.0, 240.0, 450.0, 900.0, 1500.0)

SCALAR_KINDS = (
    "reactionary_caused",
    "reactionary_suffered",
    "primary_delay",
    "destination_lateness",
    "avg_stop_lateness",
)

TRAIN_METRICS = {
    "reactionary_caused": "scalar",
    "reactionary_suffered": "scalar",
    "primary_delay": "scalar",
    "destination_lateness": "scalar",
    "avg_stop_lateness": "scalar",
    "passenger_weighted_lateness": "scalar",
    "lateness_profile": "profile",
    "lateness_frequencies": "frequency",
    "affecting_caused": "affect",
    "affecting_suffered": "affect",
}

STATION_METRICS = {
    "reactionary_caused": "scalar",
    "reactionary_suffered": "scalar",
    "primary_delay": "scalar",
    "avg_stop_lateness": "scalar",
    "passenger_weighted_lateness": "scalar",
    "lateness_frequencies": "frequency",
}


def classify_lateness(seconds: float) -> int:
    """Category index into CATEGORY_LABELS for a signed arrival lateness."""
    return int(np.searchsorted(CATEGORY_BOUNDS, seconds, side="right"))


def median_value(values: Sequence[float]) -> float:
    s = sorted(values)
    return s[(len(s) - 1) // 2]


def nearest_rank(values: Sequence[float], percentile: float) -> float:
    if not 0 < percentile <= 100:
        raise ModelError("percentile must be in (0, 100]")
    s = sorted(values)
    k = math.ceil(percentile / 100.0 * len(s))
    return s[max(k, 1) - 1]


def std_dev(values: Sequence[float]) -> float:
    # population standard deviation
    mean = sum(values) / len(values)
    return math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))


@dataclass(frozen=True)
class Summary:
    median: float
    mean: float
    std_dev: float
    p80: float


def summarize(values: Sequence[float]) -> Summary:
    return Summary(
        median=median_value(values),
        mean=sum(values) / len(values),
        std_dev=std_dev(values),
        p80=nearest_rank(values, 80),
    )


@dataclass(frozen=True)
class ScalarMetricCell:
    per_run_values: tuple[float, ...]
    summary: Summary


@dataclass(frozen=True)
class ProfileMetricCell:
    # per run: ((journey_position, lateness), ...) at each stop
    per_run_series: tuple[tuple[tuple[float, float], ...], ...]
    binned_average: tuple[float, ...]


@dataclass(frozen=True)
class FrequencyMetricCell:
    per_run_counts: tuple[tuple[int, ...], ...]  # per run, count per category
    average_counts: tuple[float, ...]


@dataclass(frozen=True)
class AffectMetricCell:
    direction: str  # "causes_delay_to" | "suffers_delay_from"
    # per run: ((other_train_id, seconds), ...) sorted by seconds descending
    per_run_breakdown: tuple[tuple[tuple[str, int], ...], ...]

    def per_run_totals(self) -> tuple[int, ...]:
        return tuple(sum(s for _, s in run) for run in self.per_run_breakdown)


@dataclass(frozen=True)
class ColumnSpec:
    metric_id: str
    family: str
    axis_range: tuple[float, float]


@dataclass(frozen=True)
class CaseMeta:
    category: Optional[str]
    active_span: Optional[tuple[int, int]]  # (first sched departure, last sched arrival)


@dataclass(frozen=True)
class MetricTable:
    case_kind: str  # "train" | "station_stop"
    case_ids: tuple[str, ...]
    columns: tuple[ColumnSpec, ...]
    cells: dict[tuple[str, str], object]  # (case_id, metric_id) -> cell
    case_meta: dict[str, CaseMeta]
    n_runs: int

    def column(self, metric_id: str) -> ColumnSpec:
        for c in self.columns:
            if c.metric_id == metric_id:
                return c
        raise ModelError(f"unknown column {metric_id!r}")

    def cell(self, case_id: str, metric_id: str):
        return self.cells[(case_id, metric_id)]


def presented_range(axis_range: tuple[float, float]) -> tuple[float, float]:
    """Degenerate [0, 0] is rendered as [0, 1] so renderers never divide by zero."""
    lo, hi = axis_range
    if hi <= lo:
        return (lo, lo + 1.0)
    return (lo, hi)


# ---------------------------------------------------------------------------
# ledger and lateness access


def _lateness_matrix(ensemble: Ensemble, train_id: str) -> np.ndarray:
    """(n_runs, n_stops) signed arrival lateness in seconds."""
    train = ensemble.timetable.train(train_id)
    sched = np.array([s.arrival for s in train.stops], dtype=np.int64)
    actual = np.array(
        [[a for a, _ in run.actual_times[train_id]] for run in ensemble.runs],
        dtype=np.int64,
    )
    return actual - sched[None, :]


# per-ensemble aggregation caches, keyed by object identity with weakref eviction
_ledger_cache: dict[int, tuple] = {}


def _ledger_index(ensemble: Ensemble):
    """Per run: caused and suffered totals by train, and primary sums by train."""
    key = id(ensemble)
    entry = _ledger_cache.get(key)
    if entry is not None and entry[0]() is ensemble:
        return entry[1]
    caused: list[dict[str, int]] = []
    suffered: list[dict[str, int]] = []
    primary: list[dict[str, int]] = []
    for run in ensemble.runs:
        c: dict[str, int] = {}
        s: dict[str, int] = {}
        p: dict[str, int] = {}
        for a in run.attributions:
            c[a.causer] = c.get(a.causer, 0) + a.seconds
            s[a.sufferer] = s.get(a.sufferer, 0) + a.seconds
        for e in run.primary_events:
            p[e.train_id] = p.get(e.train_id, 0) + e.delay
        caused.append(c)
        suffered.append(s)
        primary.append(p)
    index = (caused, suffered, primary)
    ref = weakref.ref(ensemble, lambda _, k=key: _ledger_cache.pop(k, None))
    _ledger_cache[key] = (ref, index)
    return index


def _ledger_totals(ensemble: Ensemble, train_id: str, role: str) -> list[int]:
    caused, suffered, _ = _ledger_index(ensemble)
    per_run = caused if role == "causer" else suffered
    return [d.get(train_id, 0) for d in per_run]


def scalar_metric(ensemble: Ensemble, kind: str, case_id: str) -> ScalarMetricCell:
    tt = ensemble.timetable
    train = tt.train(case_id)  # raises for unknown case
    if kind == "reactionary_caused":
        values: list[float] = [float(v) for v in _ledger_totals(ensemble, case_id, "causer")]
    elif kind == "reactionary_suffered":
        values = [float(v) for v in _ledger_totals(ensemble, case_id, "sufferer")]
    elif kind == "primary_delay":
        primary = _ledger_index(ensemble)[2]
        values = [float(d.get(case_id, 0)) for d in primary]
    elif kind == "destination_lateness":
        last = len(train.stops) - 1
        sched = train.stops[last].arrival
        values = [float(run.actual_times[case_id][last][0] - sched) for run in ensemble.runs]
    elif kind == "avg_stop_lateness":
        lat = _lateness_matrix(ensemble, case_id)
        values = [float(v) for v in lat.mean(axis=1)]
    else:
        raise ModelError(f"unknown scalar kind {kind!r}")
    return ScalarMetricCell(per_run_values=tuple(values), summary=summarize(values))


def lateness_profile(ensemble: Ensemble, train_id: str, n_bins: int) -> ProfileMetricCell:
    if n_bins < 1:
        raise ModelError("n_bins must be >= 1")
    train = ensemble.timetable.train(train_id)
    origin = train.stops[0].sched_departure
    positions = [s.arrival - origin for s in train.stops]
    duration = positions[-1]
    lat = _lateness_matrix(ensemble, train_id)

    series = tuple(
        tuple((float(p), float(l)) for p, l in zip(positions, lat[k]))
        for k in range(ensemble.n_runs)
    )

    # bin b covers (b*w, (b+1)*w] with position 0 in bin 0
    sums = [0.0] * n_bins
    counts = [0] * n_bins
    for i, pos in enumerate(positions):
        if duration > 0:
            b = max(0, math.ceil(pos / duration * n_bins) - 1)
        else:
            b = 0
        col = lat[:, i]
        sums[b] += float(col.sum())
        counts[b] += len(col)
    binned = []
    prev = 0.0  # empty bins carry the previous bin's value forward; origin default 0
    for b in range(n_bins):
        if counts[b] > 0:
            prev = sums[b] / counts[b]
        binned.append(prev)
    return ProfileMetricCell(per_run_series=series, binned_average=tuple(binned))


def lateness_frequencies(ensemble: Ensemble, train_id: str) -> FrequencyMetricCell:
    lat = _lateness_matrix(ensemble, train_id)
    cats = np.searchsorted(CATEGORY_BOUNDS, lat, side="right")
    per_run = tuple(
        tuple(int(np.count_nonzero(cats[k] == c)) for c in range(len(CATEGORY_LABELS)))
        for k in range(ensemble.n_runs)
    )
    avg = tuple(
        sum(run[c] for run in per_run) / len(per_run) for c in range(len(CATEGORY_LABELS))
    )
    return FrequencyMetricCell(per_run_counts=per_run, average_counts=avg)


def affecting_trains(ensemble: Ensemble, train_id: str, direction: str) -> AffectMetricCell:
    ensemble.timetable.train(train_id)
    if direction not in ("causes_delay_to", "suffers_delay_from"):
        raise ModelError(f"unknown direction {direction!r}")
    breakdown = []
    for run in ensemble.runs:
        per_other: dict[str, int] = {}
        for a in run.attributions:
            if direction == "causes_delay_to" and a.causer == train_id:
                per_other[a.sufferer] = per_other.get(a.sufferer, 0) + a.seconds
            elif direction == "suffers_delay_from" and a.sufferer == train_id:
                per_other[a.causer] = per_other.get(a.causer, 0) + a.seconds
        ordered = sorted(per_other.items(), key=lambda kv: (-kv[1], kv[0]))
        breakdown.append(tuple(ordered))
    return AffectMetricCell(direction=direction, per_run_breakdown=tuple(breakdown))


def passenger_weight(ensemble: Ensemble, kind: str, case_id: str) -> ScalarMetricCell:
    """Passenger-seconds of lateness: sum over stops of max(lateness, 0) x load."""
    if kind != "stop_lateness":
        raise ModelError(f"unsupported passenger weighting kind {kind!r}")
    train = ensemble.timetable.train(case_id)
    loads = [s.passenger_load for s in train.stops]
    if any(l is None for l in loads):
        raise ModelError(f"train {case_id}: passenger_load missing; cannot weight by passengers")
    load_vec = np.array(loads, dtype=np.int64)
    lat = np.maximum(_lateness_matrix(ensemble, case_id), 0)
    values = [float(v) for v in (lat * load_vec[None, :]).sum(axis=1)]
    return ScalarMetricCell(per_run_values=tuple(values), summary=summarize(values))


# ---------------------------------------------------------------------------
# station-case aggregation


def _station_resources(timetable: Timetable) -> dict[str, set[str]]:
    """Stations each resource adjoins (platform at, or segment leaving, the station)."""
    adjoins: dict[str, set[str]] = {}
    for train in timetable.trains:
        for stop in train.stops:
            for rid in (stop.platform_resource, stop.outbound_segment):
                if rid:
                    adjoins.setdefault(rid, set()).add(stop.station_id)
    return adjoins


def _station_calls(timetable: Timetable, station_id: str) -> list[tuple[str, int]]:
    calls = []
    for train in timetable.trains:
        for i, stop in enumerate(train.stops):
            if stop.station_id == station_id:
                calls.append((train.train_id, i))
    return calls


def station_scalar(ensemble: Ensemble, kind: str, station_id: str) -> ScalarMetricCell:
    tt = ensemble.timetable
    calls = _station_calls(tt, station_id)
    if not calls:
        raise ModelError(f"unknown station {station_id!r}")
    values: list[float] = []
    if kind == "reactionary_suffered":
        for run in ensemble.runs:
            total = 0
            for a in run.attributions:
                stop = tt.train(a.sufferer).stops[a.sufferer_stop_index]
                if stop.station_id == station_id:
                    total += a.seconds
            values.append(float(total))
    elif kind == "reactionary_caused":
        adjoins = _station_resources(tt)
        for run in ensemble.runs:
            total = 0
            for a in run.attributions:
                if station_id in adjoins.get(a.resource_id, ()):
                    total += a.seconds
            values.append(float(total))
    elif kind == "primary_delay":
        for run in ensemble.runs:
            total = 0
            for e in run.primary_events:
                if tt.train(e.train_id).stops[e.stop_index].station_id == station_id:
                    total += e.delay
            values.append(float(total))
    elif kind == "avg_stop_lateness":
        for run in ensemble.runs:
            lats = [
                run.actual_times[tid][i][0] - tt.train(tid).stops[i].arrival
                for tid, i in calls
            ]
            values.append(sum(lats) / len(lats))
    elif kind == "passenger_weighted_lateness":
        for run in ensemble.runs:
            total = 0.0
            for tid, i in calls:
                stop = tt.train(tid).stops[i]
                if stop.passenger_load is None:
                    raise ModelError(f"station {station_id}: passenger_load missing on {tid}")
                lat = run.actual_times[tid][i][0] - stop.arrival
                total += max(lat, 0) * stop.passenger_load
            values.append(total)
    else:
        raise ModelError(f"unknown station scalar kind {kind!r}")
    return ScalarMetricCell(per_run_values=tuple(values), summary=summarize(values))


def station_frequencies(ensemble: Ensemble, station_id: str) -> FrequencyMetricCell:
    tt = ensemble.timetable
    calls = _station_calls(tt, station_id)
    if not calls:
        raise ModelError(f"unknown station {station_id!r}")
    per_run = []
    for run in ensemble.runs:
        counts = [0] * len(CATEGORY_LABELS)
        for tid, i in calls:
            lat = run.actual_times[tid][i][0] - tt.train(tid).stops[i].arrival
            counts[classify_lateness(lat)] += 1
        per_run.append(tuple(counts))
    avg = tuple(
        sum(run[c] for run in per_run) / len(per_run) for c in range(len(CATEGORY_LABELS))
    )
    return FrequencyMetricCell(per_run_counts=tuple(per_run), average_counts=avg)


# ---------------------------------------------------------------------------
# table assembly


def _compute_cell(ensemble: Ensemble, case_kind: str, case_id: str, metric_id: str,
                  profile_bins: int):
    if case_kind == "train":
        if metric_id == "lateness_profile":
            return lateness_profile(ensemble, case_id, profile_bins)
        if metric_id == "lateness_frequencies":
            return lateness_frequencies(ensemble, case_id)
        if metric_id == "affecting_caused":
            return affecting_trains(ensemble, case_id, "causes_delay_to")
        if metric_id == "affecting_suffered":
            return affecting_trains(ensemble, case_id, "suffers_delay_from")
        if metric_id == "passenger_weighted_lateness":
            return passenger_weight(ensemble, "stop_lateness", case_id)
        return scalar_metric(ensemble, metric_id, case_id)
    else:
        if metric_id == "lateness_frequencies":
            return station_frequencies(ensemble, case_id)
        return station_scalar(ensemble, metric_id, case_id)


def build_metric_table(
    ensemble: Ensemble,
    case_kind: str,
    metric_ids: Sequence[str],
    profile_bins: int = 20,
    scale_percentile: float = 95.0,
) -> MetricTable:
    if case_kind not in ("train", "station_stop"):
        raise ModelError(f"unknown case kind {case_kind!r}")
    if not metric_ids:
        raise ModelError("metric_ids must be non-empty")
    registry = TRAIN_METRICS if case_kind == "train" else STATION_METRICS
    for m in metric_ids:
        if m not in registry:
            raise ModelError(f"metric {m!r} not available for case kind {case_kind}")

    tt = ensemble.timetable
    if case_kind == "train":
        case_ids = tuple(sorted(t.train_id for t in tt.trains))
        meta = {
            t.train_id: CaseMeta(category=t.category,
                                 active_span=(t.first_departure, t.last_arrival))
            for t in tt.trains
        }
    else:
        case_ids = tuple(tt.station_ids)
        meta = {sid: CaseMeta(category=None, active_span=None) for sid in case_ids}

    cells: dict[tuple[str, str], object] = {}
    for m in metric_ids:
        for cid in case_ids:
            cells[(cid, m)] = _compute_cell(ensemble, case_kind, cid, m, profile_bins)

    table = MetricTable(
        case_kind=case_kind,
        case_ids=case_ids,
        columns=tuple(ColumnSpec(m, registry[m], (0.0, 0.0)) for m in metric_ids),
        cells=cells,
        case_meta=meta,
        n_runs=ensemble.n_runs,
    )
    columns = tuple(
        ColumnSpec(m, registry[m], axis_range(table, m, scale_percentile)) for m in metric_ids
    )
    return replace(table, columns=columns)


def aggregate_by_station(ensemble: Ensemble, metric_ids: Sequence[str] | None = None) -> MetricTable:
    """Station-stop-case view: metrics characterize delay at each location."""
    ids = tuple(metric_ids) if metric_ids else tuple(STATION_METRICS)
    ids = tuple(m for m in ids if m != "passenger_weighted_lateness" or _has_loads(ensemble))
    return build_metric_table(ensemble, "station_stop", ids)


def _has_loads(ensemble: Ensemble) -> bool:
    return all(
        s.passenger_load is not None for t in ensemble.timetable.trains for s in t.stops
    )


# ---------------------------------------------------------------------------
# orderings, scales, views


def _sort_key(table: MetricTable, case_id: str, metric_id: str, statistic: str) -> float:
    family = table.column(metric_id).family  # raises for unknown columns
    cell = table.cell(case_id, metric_id)
    if family == "scalar":
        if statistic not in ("median", "std_dev", "p80"):
            raise ModelError(f"unknown statistic {statistic!r}")
        return getattr(cell.summary, statistic)
    if family == "frequency":
        return sum(m * c for m, c in zip(CATEGORY_MIDPOINTS, cell.average_counts))
    if family == "profile":
        vals = [l for run in cell.per_run_series for _, l in run]
        return sum(vals) / len(vals) if vals else 0.0
    if family == "affect":
        return median_value(cell.per_run_totals())
    raise ModelError(f"unsortable column family {family!r}")


def sort_cases(table: MetricTable, column_id: str, statistic: str = "median",
               order: str = "desc") -> list[str]:
    if order not in ("asc", "desc"):
        raise ModelError(f"unknown order {order!r}")
    keyed = [(_sort_key(table, cid, column_id, statistic), cid) for cid in table.case_ids]
    keyed.sort(key=lambda kv: ((-kv[0] if order == "desc" else kv[0]), kv[1]))
    return [cid for _, cid in keyed]


def decile_boundaries(table: MetricTable, column_id: str, statistic: str = "median") -> list[int]:
    """Row indices (into the descending sort) after which a decile line is drawn.

    A boundary follows the first row whose cumulative share reaches k*10% of
    the grand total, k = 1..9, de-duplicated; empty when the total is zero.
    """
    order = sort_cases(table, column_id, statistic, "desc")
    values = [_sort_key(table, cid, column_id, statistic) for cid in order]
    if any(v < 0 for v in values):
        raise ModelError("decile boundaries require non-negative values")
    total = sum(values)
    if total == 0:
        return []
    boundaries: list[int] = []
    cum = 0.0
    k = 1
    for row, v in enumerate(values):
        cum += v
        while k <= 9 and cum >= k * total / 10.0:
            if not boundaries or boundaries[-1] != row:
                boundaries.append(row)
            k += 1
    return boundaries


def axis_range(table: MetricTable, column_id: str, percentile: float = 95.0) -> tuple[float, float]:
    """[0, upper] with upper the nearest-rank percentile over the column's values."""
    family = table.column(column_id).family
    values: list[float] = []
    for cid in table.case_ids:
        cell = table.cell(cid, column_id)
        if family == "scalar":
            values.extend(cell.per_run_values)
        elif family == "profile":
            values.extend(l for run in cell.per_run_series for _, l in run)
        elif family == "frequency":
            values.extend(float(sum(run)) for run in cell.per_run_counts)
        elif family == "affect":
            values.extend(float(v) for v in cell.per_run_totals())
    if not values:
        return (0.0, 0.0)
    upper = nearest_rank(values, percentile)
    return (0.0, max(0.0, float(upper)))


def temporal_histogram(timetable: Timetable, bin_minutes: int = 30) -> list[dict]:
    """Per time-of-day bin, active-train counts keyed by category.

    Bins are half-open [start, end); a train is active over
    [first scheduled departure, last scheduled arrival).
    """
    if bin_minutes <= 0 or 1440 % bin_minutes != 0:
        raise ModelError("bin_minutes must divide 1440")
    width = bin_minutes * 60
    from .model import MAX_CLOCK_SECONDS

    n_bins = math.ceil(MAX_CLOCK_SECONDS / width)
    bins = []
    for b in range(n_bins):
        start, end = b * width, (b + 1) * width
        counts: dict[str, int] = {}
        for t in timetable.trains:
            if t.first_departure < end and t.last_arrival > start:
                counts[t.category] = counts.get(t.category, 0) + 1
        bins.append({"start": start, "end": min(end, MAX_CLOCK_SECONDS), "counts": counts})
    return bins


def filter_cases(
    table: MetricTable,
    id_pattern: Optional[str] = None,
    categories: Optional[Iterable[str]] = None,
    time_window: Optional[tuple[int, int]] = None,
) -> MetricTable:
    """Sub-table view; parent sort order and axis ranges are kept, not recomputed."""
    cat_set = set(categories) if categories is not None else None
    kept = []
    for cid in table.case_ids:
        meta = table.case_meta[cid]
        if id_pattern and id_pattern not in cid:
            continue
        if cat_set is not None and meta.category not in cat_set:
            continue
        if time_window is not None and meta.active_span is not None:
            lo, hi = time_window
            dep, arr = meta.active_span
            if not (dep < hi and arr > lo):
                continue
        kept.append(cid)
    cells = {
        (cid, col.metric_id): table.cells[(cid, col.metric_id)]
        for cid in kept for col in table.columns
    }
    return replace(
        table,
        case_ids=tuple(kept),
        cells=cells,
        case_meta={cid: table.case_meta[cid] for cid in kept},
    )


@dataclass(frozen=True)
class SampledView:
    case_ids: tuple[str, ...]
    run_indices: tuple[int, ...]
    row_stride: int
    run_stride: int


def sample_for_render(table: MetricTable, max_rows: int, max_runs: int) -> SampledView:
    """Deterministic uniform-stride sub-sampling of rows and runs for rendering."""
    if max_rows < 1 or max_runs < 1:
        raise ModelError("sample limits must be >= 1")
    n_rows = len(table.case_ids)
    row_stride = max(1, math.ceil(n_rows / max_rows)) if n_rows else 1
    run_stride = max(1, math.ceil(table.n_runs / max_runs)) if table.n_runs else 1
    return SampledView(
        case_ids=table.case_ids[::row_stride],
        run_indices=tuple(range(0, table.n_runs, run_stride)),
        row_stride=row_stride,
        run_stride=run_stride,
    )
