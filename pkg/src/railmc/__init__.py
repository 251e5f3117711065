"""Seeded Monte-Carlo simulation of timetable delay propagation.

Generates ensembles of alternative days with primary and reactionary
delays, exact per-pair delay attribution, and case-by-variable metric
tables for analyst exploration.
"""
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
from .sim import (
    ResourcePlan,
    SimulationError,
    build_resource_plan,
    run_ensemble,
    sample_primary_delays,
    simulate_run,
)
from .metrics import (
    CATEGORY_LABELS,
    MetricTable,
    affecting_trains,
    aggregate_by_station,
    axis_range,
    build_metric_table,
    decile_boundaries,
    filter_cases,
    lateness_frequencies,
    lateness_profile,
    passenger_weight,
    sample_for_render,
    scalar_metric,
    sort_cases,
    temporal_histogram,
)
from .fileio import (
    FileFormatError,
    export_table,
    import_table,
    parse_timetable,
    read_ensemble,
    write_ensemble,
    write_timetable,
)

__version__ = "0.1.0"
