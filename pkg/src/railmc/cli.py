"""Command line interface: batch simulation, table exports, reports, service."""
from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click

from .fileio import (
    FileFormatError,
    delay_config_from_dict,
    export_table,
    parse_timetable,
    read_ensemble,
    sim_params_from_dict,
    write_ensemble,
)
from .metrics import build_metric_table, sort_cases
from .model import ModelError, SimParams
from .sim import SimulationError, run_ensemble

CASE_KINDS = {"train": "train", "station": "station_stop"}


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _load_ensemble(path: str):
    try:
        return read_ensemble(Path(path).read_bytes())
    except (OSError, FileFormatError) as exc:
        _fail(str(exc))


@click.group()
def main() -> None:
    """Monte-Carlo timetable delay simulation and chart-table exports."""


@main.command()
@click.option("--timetable", "timetable_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--runs", "n_runs", required=True, type=int)
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--params", "params_path", type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def simulate(timetable_path, config_path, n_runs, seed, params_path, out_path):
    """Simulate a seeded ensemble and write the ensemble file."""
    if n_runs < 1:
        raise click.UsageError("--runs must be >= 1")
    started = time.perf_counter()
    try:
        timetable = parse_timetable(Path(timetable_path).read_bytes())
        config = delay_config_from_dict(json.loads(Path(config_path).read_text()))
        params = (sim_params_from_dict(json.loads(Path(params_path).read_text()))
                  if params_path else SimParams())
        ensemble = run_ensemble(timetable, config, params, n_runs, seed)
    except (OSError, json.JSONDecodeError, FileFormatError, ModelError, SimulationError) as exc:
        _fail(str(exc))
    Path(out_path).write_bytes(write_ensemble(ensemble))
    elapsed = time.perf_counter() - started
    total_attr = sum(a.seconds for run in ensemble.runs for a in run.attributions)
    click.echo(f"runs: {ensemble.n_runs}")
    click.echo(f"total attribution seconds: {total_attr}")
    click.echo(f"wall time: {elapsed:.2f}s")


def _parse_sort(spec: str):
    parts = spec.split(":")
    if len(parts) != 3:
        raise click.UsageError("--sort must be COLUMN:STATISTIC:ORDER")
    return parts[0], parts[1], parts[2]


@main.command()
@click.option("--ensemble", "ensemble_path", required=True, type=click.Path(exists=True))
@click.option("--case", "case", default="train", type=click.Choice(sorted(CASE_KINDS)))
@click.option("--metrics", "metrics", required=True,
              help="comma-separated metric ids, e.g. reactionary_caused,lateness_profile")
@click.option("--sort", "sort_spec", help="COLUMN:STATISTIC:ORDER, e.g. reactionary_caused:median:desc")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--format", "fmt", default="delimited",
              type=click.Choice(["delimited", "structured"]), show_default=True)
def table(ensemble_path, case, metrics, sort_spec, out_path, fmt):
    """Build a case-by-variable metric table and export it."""
    ensemble = _load_ensemble(ensemble_path)
    metric_ids = [m.strip() for m in metrics.split(",") if m.strip()]
    try:
        tbl = build_metric_table(ensemble, CASE_KINDS[case], metric_ids)
        if sort_spec:
            column, statistic, order = _parse_sort(sort_spec)
            ordered = sort_cases(tbl, column, statistic, order)
            from dataclasses import replace

            tbl = replace(tbl, case_ids=tuple(ordered))
        data = export_table(tbl, fmt)
    except ModelError as exc:
        _fail(str(exc))
    Path(out_path).write_bytes(data)
    click.echo(f"wrote {len(tbl.case_ids)} cases x {len(tbl.columns)} columns to {out_path}")


@main.command()
@click.option("--ensemble", "ensemble_path", required=True, type=click.Path(exists=True))
@click.option("--case", "case", default="train", type=click.Choice(sorted(CASE_KINDS)))
@click.option("--metrics", "metrics",
              default="reactionary_caused,reactionary_suffered,lateness_profile,"
                      "lateness_frequencies,affecting_suffered")
@click.option("--sort-column", "sort_column")
@click.option("--statistic", default="median", show_default=True)
@click.option("--top", default=40, type=int, show_default=True,
              help="rows rendered in the chart-table figure")
@click.option("--out-dir", "out_dir", required=True, type=click.Path())
def report(ensemble_path, case, metrics, sort_column, statistic, top, out_dir):
    """Render the delimited table plus chart-table and histogram figures."""
    from .report import render_report

    ensemble = _load_ensemble(ensemble_path)
    metric_ids = [m.strip() for m in metrics.split(",") if m.strip()]
    if case == "station":
        metric_ids = [m for m in metric_ids if not m.startswith("affecting")]
    try:
        tbl = build_metric_table(ensemble, CASE_KINDS[case], metric_ids)
        paths = render_report(tbl, ensemble.timetable, Path(out_dir),
                              sort_column=sort_column, statistic=statistic, top=top)
    except ModelError as exc:
        _fail(str(exc))
    for p in paths:
        click.echo(f"wrote {p}")


@main.command()
@click.option("--port", envvar="RAILMC_PORT", default=8000, type=int, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(port, host):
    """Run the HTTP service."""
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
