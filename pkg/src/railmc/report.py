"""Static chart-table reports: mini-chart figures rendered to files.

The interactive UI consumes the HTTP service; this module produces the
same visual vocabulary as matplotlib figures for batch reports - a
chart-table overview (one mini-chart per cell, low level-of-detail) and
the time-of-day activity histogram - written next to the delimited
table export.
"""
from __future__ import annotations

import hashlib
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import TwoSlopeNorm

from .fileio import export_table
from .metrics import (
    CATEGORY_LABELS,
    AffectMetricCell,
    FrequencyMetricCell,
    MetricTable,
    ProfileMetricCell,
    ScalarMetricCell,
    decile_boundaries,
    median_value,
    presented_range,
    sort_cases,
    temporal_histogram,
)
from .model import Timetable

# green for <1 min, reds darkening with lateness
CATEGORY_COLORS = (
    "#81c784",  # early
    "#43a047",  # 0-1min
    "#ffcdd2",  # 1-3min
    "#ef9a9a",  # 3-5min
    "#e57373",  # 5-10min
    "#d32f2f",  # 10-20min
    "#7f0000",  # 20+min
)

PALETTE_SIZE = 20


def train_color(train_id: str):
    """Stable categorical hue per train; collisions over the palette accepted."""
    h = int.from_bytes(hashlib.blake2b(train_id.encode(), digest_size=4).digest(), "big")
    return plt.get_cmap("tab20")(h % PALETTE_SIZE)


def _draw_scalar(ax, cell: ScalarMetricCell, axis_range):
    lo, hi = presented_range(axis_range)
    s = cell.summary
    ax.plot([max(lo, s.median - s.std_dev), min(hi, s.median + s.std_dev)], [0.5, 0.5],
            color="#90a4ae", lw=3, solid_capstyle="butt")
    ax.plot([s.median], [0.5], marker="o", color="#263238", ms=4)
    ax.set_xlim(lo, hi)
    ax.set_ylim(0, 1)


def _draw_profile(ax, cell: ProfileMetricCell, vmax: float):
    values = np.array(cell.binned_average, dtype=float)[None, :]
    vmax = max(vmax, 1.0)
    ax.imshow(values, aspect="auto", cmap="RdBu_r",
              norm=TwoSlopeNorm(vmin=-vmax, vcenter=0.0, vmax=vmax))


def _draw_frequency(ax, cell: FrequencyMetricCell, axis_range):
    _, hi = presented_range(axis_range)
    left = 0.0
    for c, count in enumerate(cell.average_counts):
        if count > 0:
            ax.barh(0.5, count, left=left, color=CATEGORY_COLORS[c], height=0.8)
            left += count
    ax.set_xlim(0, max(hi, left, 1.0))
    ax.set_ylim(0, 1)


def _affect_median_breakdown(cell: AffectMetricCell) -> list[tuple[str, float]]:
    others = sorted({tid for run in cell.per_run_breakdown for tid, _ in run})
    out = []
    for tid in others:
        per_run = [dict(run).get(tid, 0) for run in cell.per_run_breakdown]
        med = median_value(per_run)
        if med > 0:
            out.append((tid, float(med)))
    out.sort(key=lambda kv: (-kv[1], kv[0]))
    return out


def _draw_affect(ax, cell: AffectMetricCell, axis_range):
    _, hi = presented_range(axis_range)
    left = 0.0
    for tid, med in _affect_median_breakdown(cell):
        ax.barh(0.5, med, left=left, color=train_color(tid), height=0.8)
        left += med
    ax.set_xlim(0, max(hi, 1.0))
    ax.set_ylim(0, 1)


def chart_table_figure(table: MetricTable, case_order: list[str],
                       deciles: list[int] | None = None) -> plt.Figure:
    """Low-LoD mini-chart grid: one row per case, one column per metric."""
    n_rows, n_cols = len(case_order), len(table.columns)
    fig, axes = plt.subplots(
        n_rows, n_cols,
        figsize=(2.2 * n_cols + 1.2, max(0.32 * n_rows, 1.5)),
        squeeze=False,
    )
    profile_vmax = max(
        (abs(v) for c in table.columns if c.family == "profile"
         for cid in case_order for v in table.cell(cid, c.metric_id).binned_average),
        default=1.0,
    )
    for r, cid in enumerate(case_order):
        for c, col in enumerate(table.columns):
            ax = axes[r][c]
            cell = table.cell(cid, col.metric_id)
            if col.family == "scalar":
                _draw_scalar(ax, cell, col.axis_range)
            elif col.family == "profile":
                _draw_profile(ax, cell, profile_vmax)
            elif col.family == "frequency":
                _draw_frequency(ax, cell, col.axis_range)
            elif col.family == "affect":
                _draw_affect(ax, cell, col.axis_range)
            ax.set_xticks([])
            ax.set_yticks([])
            if c == 0:
                ax.set_ylabel(cid, rotation=0, ha="right", va="center", fontsize=6)
            if r == 0:
                ax.set_title(col.metric_id, fontsize=7)
    for row in deciles or []:
        if row + 1 < n_rows:
            y = axes[row][0].get_position().y0
            fig.add_artist(plt.Line2D([0.02, 0.98], [y, y], color="red", lw=0.8,
                                      transform=fig.transFigure))
    return fig


def histogram_figure(timetable: Timetable, bin_minutes: int = 30) -> plt.Figure:
    bins = temporal_histogram(timetable, bin_minutes)
    categories = sorted({cat for b in bins for cat in b["counts"]})
    fig, ax = plt.subplots(figsize=(10, 2.2))
    starts = [b["start"] / 3600.0 for b in bins]
    bottom = np.zeros(len(bins))
    width = bin_minutes / 60.0
    for cat in categories:
        counts = np.array([b["counts"].get(cat, 0) for b in bins], dtype=float)
        ax.bar(starts, counts, width=width, bottom=bottom, align="edge", label=cat)
        bottom += counts
    ax.set_xlabel("hour of day")
    ax.set_ylabel("active trains")
    if categories:
        ax.legend(fontsize=7)
    fig.tight_layout()
    return fig


def render_report(
    table: MetricTable,
    timetable: Timetable,
    out_dir: Path,
    sort_column: str | None = None,
    statistic: str = "median",
    top: int = 40,
) -> list[Path]:
    """Write the delimited export plus overview figures; returns written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    order = list(table.case_ids)
    deciles: list[int] = []
    if sort_column:
        order = sort_cases(table, sort_column, statistic, "desc")
        family = table.column(sort_column).family
        keys_non_negative = family != "scalar" or all(
            v >= 0 for cid in table.case_ids
            for v in [getattr(table.cell(cid, sort_column).summary, statistic)]
        )
        if keys_non_negative:
            deciles = decile_boundaries(table, sort_column, statistic)

    from dataclasses import replace

    ordered = replace(table, case_ids=tuple(order))
    paths = []
    csv_path = out_dir / "table.csv"
    csv_path.write_bytes(export_table(ordered, "delimited"))
    paths.append(csv_path)

    fig = chart_table_figure(table, order[:top], [d for d in deciles if d < top])
    fig_path = out_dir / "charttable.png"
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)
    paths.append(fig_path)

    hist = histogram_figure(timetable)
    hist_path = out_dir / "histogram.png"
    hist.savefig(hist_path, dpi=150)
    plt.close(hist)
    paths.append(hist_path)
    return paths
