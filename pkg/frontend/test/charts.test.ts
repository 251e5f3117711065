import { describe, expect, it } from "vitest";

import {
  DOT_DIAMETER_PX,
  JITTER_AMPLITUDE_RATIO,
  jitterPhase,
  renderAffectChart,
  renderFrequencyChart,
  renderLatenessChart,
  renderProfileChart,
  type ScalarHighMarks,
  type ScalarLowMarks,
  type StackedBarHighMarks,
  type StackedBarLowMarks,
} from "../src/charts.js";
import { CATEGORY_COLORS, trainColor } from "../src/color.js";
import type { CellPayload } from "../src/types.js";

const RUNS = [0, 1, 2];

function scalarCell(values: number[]): CellPayload {
  return {
    summary: { median: 0, mean: 0, std_dev: 0, p80: 0 },
    detail: { per_run_values: values },
  };
}

function rgbChannels(color: string): [number, number, number] {
  const m = /rgb\((\d+),(\d+),(\d+)\)/.exec(color)!;
  return [Number(m[1]), Number(m[2]), Number(m[3])];
}

describe("lateness chart", () => {
  it("all runs equal: one dot column, zero-width low-LoD extent", () => {
    const cell: CellPayload = {
      summary: { median: 60, mean: 60, std_dev: 0, p80: 60 },
      detail: { per_run_values: [60, 60, 60] },
    };
    const high = renderLatenessChart(cell, "high", [0, 120], RUNS) as ScalarHighMarks;
    expect(new Set(high.dots.map((d) => d.x))).toEqual(new Set([60]));
    const low = renderLatenessChart(cell, "low", [0, 120], RUNS) as ScalarLowMarks;
    expect(low.extent.x1 - low.extent.x0).toBe(0);
    expect(low.extent.label).toBe("±1 std dev");
  });

  it("baseline: marks at zero", () => {
    const low = renderLatenessChart(
      scalarCell([0, 0, 0]), "low", [0, 1], RUNS) as ScalarLowMarks;
    expect(low.median.x).toBe(0);
  });

  it("median mark sits at the service median (runs {0, 60, 120} -> 60)", () => {
    const cell: CellPayload = {
      summary: { median: 60, mean: 60, std_dev: 48.99, p80: 120 },
      detail: { per_run_values: [0, 60, 120] },
    };
    const low = renderLatenessChart(cell, "low", [0, 200], RUNS) as ScalarLowMarks;
    expect(low.median.x).toBe(60);
    expect(low.median.value).toBe(60);
  });

  it("out-of-range dots clamp to the axis and flag overflow", () => {
    const high = renderLatenessChart(
      scalarCell([50, 500, -5]), "high", [0, 100], RUNS) as ScalarHighMarks;
    expect(high.dots.map((d) => [d.x, d.overflow])).toEqual([
      [50, false], [100, true], [0, true]]);
  });

  it("jitter is deterministic per run and bounded by 30% of dot diameter", () => {
    const a = renderLatenessChart(scalarCell([1, 2, 3]), "high", [0, 5], RUNS) as ScalarHighMarks;
    const b = renderLatenessChart(scalarCell([9, 9, 9]), "high", [0, 10], RUNS) as ScalarHighMarks;
    for (let k = 0; k < RUNS.length; k++) {
      expect(a.dots[k]!.jitterPhase).toBe(b.dots[k]!.jitterPhase);
      expect(a.dots[k]!.jitterPhase).toBe(jitterPhase(RUNS[k]!));
      expect(a.dots[k]!.jitterAmplitude).toBeLessThanOrEqual(
        JITTER_AMPLITUDE_RATIO * DOT_DIAMETER_PX);
    }
  });

  it("value-ordered runs keep their run labels", () => {
    const high = renderLatenessChart(
      scalarCell([30, 10, 20]), "high", [0, 40], RUNS,
      { runOrder: "by_value" }) as ScalarHighMarks;
    expect(high.dots.map((d) => d.run)).toEqual([1, 2, 0]);
    expect(high.dots.map((d) => d.slot)).toEqual([0, 1, 2]);
  });
});

describe("profile chart", () => {
  function profileCell(binned: number[], series: [number, number][][]): CellPayload {
    return { summary: { binned_average: binned }, detail: { per_run_series: series } };
  }

  it("on-time: neutral strip, flat lines at zero", () => {
    const flat: [number, number][] = [[0, 0], [600, 0]];
    const cell = profileCell([0, 0], [flat, flat, flat]);
    const low = renderProfileChart(cell, "low", [0, 100], RUNS);
    if (low.kind !== "profile-low") throw new Error("expected strips");
    expect(low.strips.map((s) => s.color)).toEqual(["rgb(255,255,255)", "rgb(255,255,255)"]);
    const high = renderProfileChart(cell, "high", [0, 100], RUNS);
    if (high.kind !== "profile-high") throw new Error("expected lines");
    expect(high.lines).toHaveLength(3);
    for (const line of high.lines) {
      expect(line.points.every(([, lat]) => lat === 0)).toBe(true);
    }
  });

  it("later bins render darker red", () => {
    const low = renderProfileChart(profileCell([60, 120], []), "low", [0, 120], RUNS);
    if (low.kind !== "profile-low") throw new Error("expected strips");
    const [first, second] = low.strips.map((s) => rgbChannels(s.color));
    // red channel saturated in both, green/blue drop as lateness grows
    expect(second![1]).toBeLessThan(first![1]);
    expect(second![2]).toBeLessThan(first![2]);
    expect(first![0]).toBeGreaterThan(first![1]);
  });

  it("early values render blue", () => {
    const low = renderProfileChart(profileCell([-60], []), "low", [0, 60], RUNS);
    if (low.kind !== "profile-low") throw new Error("expected strips");
    const [r, , b] = rgbChannels(low.strips[0]!.color);
    expect(b).toBeGreaterThan(r);
  });
});

describe("frequency chart", () => {
  it("average {0-1min: 5}: a single green bar", () => {
    const cell: CellPayload = { summary: { average_counts: [0, 5, 0, 0, 0, 0, 0] } };
    const low = renderFrequencyChart(cell, "low", RUNS) as StackedBarLowMarks;
    expect(low.segments).toHaveLength(1);
    expect(low.segments[0]).toMatchObject({ length: 5, color: CATEGORY_COLORS[1] });
  });

  it("zero stops: empty cell", () => {
    const cell: CellPayload = { summary: { average_counts: [0, 0, 0, 0, 0, 0, 0] } };
    const low = renderFrequencyChart(cell, "low", RUNS) as StackedBarLowMarks;
    expect(low.segments).toEqual([]);
  });

  it("alternating all-green / all-red runs: alternating high-LoD columns", () => {
    const green = [0, 4, 0, 0, 0, 0, 0];
    const red = [0, 0, 0, 0, 0, 0, 4];
    const cell: CellPayload = {
      summary: { average_counts: [0, 2, 0, 0, 0, 0, 2] },
      detail: { per_run_counts: [green, red, green] },
    };
    const high = renderFrequencyChart(cell, "high", RUNS) as StackedBarHighMarks;
    const colors = high.bars.map((b) => b.segments[0]!.color);
    expect(colors).toEqual([CATEGORY_COLORS[1], CATEGORY_COLORS[6], CATEGORY_COLORS[1]]);
    expect(high.bars.map((b) => b.run)).toEqual(RUNS);
  });
});

describe("affect chart", () => {
  it("sub-bar lengths proportional to ledger seconds (A 60 + C 30 -> 2:1)", () => {
    const cell: CellPayload = {
      summary: {
        direction: "suffers_delay_from",
        median_breakdown: [["A", 60], ["C", 30]],
      },
    };
    const low = renderAffectChart(cell, "low", RUNS) as StackedBarLowMarks;
    expect(low.segments.map((s) => s.length)).toEqual([60, 30]);
    expect(low.segments[1]!.offset).toBe(60);
  });

  it("one causer every run: identical single-hue columns", () => {
    const cell: CellPayload = {
      summary: { direction: "suffers_delay_from", median_breakdown: [["A", 60]] },
      detail: { per_run_breakdown: [[["A", 50]], [["A", 60]], [["A", 70]]] },
    };
    const high = renderAffectChart(cell, "high", RUNS) as StackedBarHighMarks;
    const hues = new Set(high.bars.map((b) => b.segments[0]!.color));
    expect(hues).toEqual(new Set([trainColor("A")]));
  });

  it("different causers: varying hues, stable per train across charts", () => {
    const cell: CellPayload = {
      summary: { direction: "suffers_delay_from", median_breakdown: [] },
      detail: { per_run_breakdown: [[["A", 60]], [["B7", 60]], [["A", 30]]] },
    };
    const high = renderAffectChart(cell, "high", RUNS) as StackedBarHighMarks;
    expect(high.bars[0]!.segments[0]!.color).toBe(high.bars[2]!.segments[0]!.color);
    expect(trainColor("A")).toBe(trainColor("A"));
    expect(high.bars.map((b) => b.run)).toEqual(RUNS);
  });
});
