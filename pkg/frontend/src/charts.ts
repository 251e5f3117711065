/**
 * Mini-chart renderers.
 *
 * Each renderer turns one service cell payload into a declarative mark
 * structure that a thin canvas/SVG layer paints. Marks carry the data they
 * came from verbatim, so tooltips and tests read service values directly.
 *
 * High level-of-detail charts expose one mark per sampled run; the mark at
 * slot k always corresponds to `runIndices[k]`, so the same day lines up
 * vertically/horizontally across every chart in the table unless the user
 * explicitly switches a chart to value order.
 */

import { CATEGORY_COLORS, divergingColor, hashId, trainColor } from "./color.js";
import { clampToDomain } from "./scales.js";
import type { Lod } from "./state.js";
import type {
  AffectDetail,
  AffectSummary,
  CellPayload,
  FrequencyDetail,
  FrequencySummary,
  ProfileDetail,
  ProfileSummary,
  ScalarDetail,
  ScalarSummary,
} from "./types.js";

export const DOT_DIAMETER_PX = 6;
/** Animated jitter displacement never exceeds 30% of the dot diameter. */
export const JITTER_AMPLITUDE_RATIO = 0.3;

export interface RenderOptions {
  selectedRun?: number;
  runOrder?: "run_index" | "by_value";
}

interface RunMarkBase {
  /** position along the run axis; slot k holds runIndices[k] in run order */
  slot: number;
  run: number;
  dimmed: boolean;
}

export interface DotMark extends RunMarkBase {
  kind: "dot";
  x: number;
  overflow: boolean;
  /** deterministic per-dot animation phase, radians */
  jitterPhase: number;
  /** peak vertical displacement in pixels */
  jitterAmplitude: number;
}

export interface ScalarLowMarks {
  kind: "scalar-low";
  median: { x: number; value: number };
  extent: { x0: number; x1: number; label: string };
}

export interface ScalarHighMarks {
  kind: "scalar-high";
  dots: DotMark[];
}

export interface StripMark {
  kind: "strip";
  bin: number;
  value: number;
  color: string;
}

export interface ProfileLowMarks {
  kind: "profile-low";
  strips: StripMark[];
}

export interface RunLineMark extends RunMarkBase {
  kind: "line";
  points: [number, number][];
}

export interface ProfileHighMarks {
  kind: "profile-high";
  lines: RunLineMark[];
}

export interface BarSegment {
  /** lateness category index or train id, depending on the chart */
  key: string;
  length: number;
  offset: number;
  color: string;
}

export interface StackedBarLowMarks {
  kind: "stacked-low";
  segments: BarSegment[];
}

export interface RunBarMark extends RunMarkBase {
  kind: "bar";
  segments: BarSegment[];
}

export interface StackedBarHighMarks {
  kind: "stacked-high";
  bars: RunBarMark[];
}

export type ChartMarks =
  | ScalarLowMarks
  | ScalarHighMarks
  | ProfileLowMarks
  | ProfileHighMarks
  | StackedBarLowMarks
  | StackedBarHighMarks;

function dimmed(run: number, selectedRun?: number): boolean {
  return selectedRun !== undefined && run !== selectedRun;
}

/** Deterministic jitter phase per run index: reproducible screenshots. */
export function jitterPhase(run: number): number {
  return (hashId(String(run)) % 3600) * (Math.PI / 1800);
}

function orderSlots(
  runIndices: number[],
  valueOf: (slot: number) => number,
  runOrder: "run_index" | "by_value",
): number[] {
  const slots = runIndices.map((_, k) => k);
  if (runOrder === "by_value") {
    slots.sort((a, b) => valueOf(a) - valueOf(b) || a - b);
  }
  return slots;
}

export function renderLatenessChart(
  cell: CellPayload,
  lod: Lod,
  axisRange: [number, number],
  runIndices: number[],
  opts: RenderOptions = {},
): ScalarLowMarks | ScalarHighMarks {
  const summary = cell.summary as ScalarSummary;
  if (lod === "low") {
    return {
      kind: "scalar-low",
      median: {
        x: clampToDomain(summary.median, axisRange).value,
        value: summary.median,
      },
      extent: {
        x0: clampToDomain(summary.median - summary.std_dev, axisRange).value,
        x1: clampToDomain(summary.median + summary.std_dev, axisRange).value,
        label: "±1 std dev",
      },
    };
  }
  const detail = cell.detail as ScalarDetail;
  const values = detail.per_run_values;
  const order = orderSlots(runIndices, (k) => values[k]!, opts.runOrder ?? "run_index");
  const dots: DotMark[] = order.map((k, slot) => {
    const run = runIndices[k]!;
    const { value: x, overflow } = clampToDomain(values[k]!, axisRange);
    return {
      kind: "dot",
      slot,
      run,
      x,
      overflow,
      jitterPhase: jitterPhase(run),
      jitterAmplitude: JITTER_AMPLITUDE_RATIO * DOT_DIAMETER_PX,
      dimmed: dimmed(run, opts.selectedRun),
    };
  });
  return { kind: "scalar-high", dots };
}

export function renderProfileChart(
  cell: CellPayload,
  lod: Lod,
  axisRange: [number, number],
  runIndices: number[],
  opts: RenderOptions = {},
): ProfileLowMarks | ProfileHighMarks {
  const vmax = Math.max(Math.abs(axisRange[0]), Math.abs(axisRange[1]));
  if (lod === "low") {
    const summary = cell.summary as ProfileSummary;
    return {
      kind: "profile-low",
      strips: summary.binned_average.map((value, bin) => ({
        kind: "strip",
        bin,
        value,
        color: divergingColor(value, vmax),
      })),
    };
  }
  const detail = cell.detail as ProfileDetail;
  // profile lines stay in run order: value order has no meaning for curves
  const lines: RunLineMark[] = detail.per_run_series.map((points, k) => {
    const run = runIndices[k]!;
    return {
      kind: "line",
      slot: k,
      run,
      points: points.map(([pos, lat]) => [pos, lat] as [number, number]),
      dimmed: dimmed(run, opts.selectedRun),
    };
  });
  return { kind: "profile-high", lines };
}

function stackCounts(counts: number[]): BarSegment[] {
  const segments: BarSegment[] = [];
  let offset = 0;
  counts.forEach((count, category) => {
    if (count > 0) {
      segments.push({
        key: String(category),
        length: count,
        offset,
        color: CATEGORY_COLORS[category]!,
      });
      offset += count;
    }
  });
  return segments;
}

export function renderFrequencyChart(
  cell: CellPayload,
  lod: Lod,
  runIndices: number[],
  opts: RenderOptions = {},
): StackedBarLowMarks | StackedBarHighMarks {
  if (lod === "low") {
    const summary = cell.summary as FrequencySummary;
    return { kind: "stacked-low", segments: stackCounts(summary.average_counts) };
  }
  const detail = cell.detail as FrequencyDetail;
  const totals = detail.per_run_counts.map((c) => c.reduce((a, b) => a + b, 0));
  const order = orderSlots(runIndices, (k) => totals[k]!, opts.runOrder ?? "run_index");
  const bars: RunBarMark[] = order.map((k, slot) => {
    const run = runIndices[k]!;
    return {
      kind: "bar",
      slot,
      run,
      segments: stackCounts(detail.per_run_counts[k]!),
      dimmed: dimmed(run, opts.selectedRun),
    };
  });
  return { kind: "stacked-high", bars };
}

function stackBreakdown(breakdown: [string, number][]): BarSegment[] {
  const segments: BarSegment[] = [];
  let offset = 0;
  for (const [train, seconds] of breakdown) {
    if (seconds > 0) {
      segments.push({ key: train, length: seconds, offset, color: trainColor(train) });
      offset += seconds;
    }
  }
  return segments;
}

export function renderAffectChart(
  cell: CellPayload,
  lod: Lod,
  runIndices: number[],
  opts: RenderOptions = {},
): StackedBarLowMarks | StackedBarHighMarks {
  if (lod === "low") {
    const summary = cell.summary as AffectSummary;
    return { kind: "stacked-low", segments: stackBreakdown(summary.median_breakdown) };
  }
  const detail = cell.detail as AffectDetail;
  const totals = detail.per_run_breakdown.map((run) =>
    run.reduce((a, [, s]) => a + s, 0),
  );
  const order = orderSlots(runIndices, (k) => totals[k]!, opts.runOrder ?? "run_index");
  const bars: RunBarMark[] = order.map((k, slot) => {
    const run = runIndices[k]!;
    return {
      kind: "bar",
      slot,
      run,
      segments: stackBreakdown(detail.per_run_breakdown[k]!),
      dimmed: dimmed(run, opts.selectedRun),
    };
  });
  return { kind: "stacked-high", bars };
}
