/**
 * Derived rendering state for the interaction set: hover raising, run and
 * case highlighting, decile lines, sampling badge and tooltips.
 */

import {
  renderAffectChart,
  renderFrequencyChart,
  renderLatenessChart,
  renderProfileChart,
  type ChartMarks,
} from "./charts.js";
import { chooseLod, showSamplingBadge, type Lod, type ViewState } from "./state.js";
import type { AffectingPayload, CellPayload, TablePayload } from "./types.js";

export const LOLIGHT_OPACITY = 0.15;

/**
 * The affecting-set for a highlight selection: the selected case plus every
 * train the service reports as involved. All other rows are lolighted.
 */
export function highlightSet(selection: AffectingPayload): Set<string> {
  return new Set([selection.case_id, ...selection.involved]);
}

/** Opacity per visible row; 1 everywhere when nothing is highlighted. */
export function rowOpacities(
  caseOrder: string[],
  highlighted?: Set<string>,
): Record<string, number> {
  const opacities: Record<string, number> = {};
  for (const caseId of caseOrder) {
    opacities[caseId] = !highlighted || highlighted.has(caseId) ? 1 : LOLIGHT_OPACITY;
  }
  return opacities;
}

/** The hovered cell is raised above its neighbors and rendered unclipped. */
export function cellLayer(
  state: ViewState,
  caseId: string,
  metricId: string,
): { zIndex: number; clip: boolean } {
  const hovered =
    state.hovered?.caseId === caseId && state.hovered?.metricId === metricId;
  return { zIndex: hovered ? 1 : 0, clip: !hovered };
}

/** Red decile lines are drawn below these row positions (service indices). */
export function decileLineRows(payload: TablePayload): number[] {
  return payload.decile ? [...payload.decile.boundaries] : [];
}

/**
 * Tooltip rows for a cell: service payload values verbatim, no client-side
 * recomputation.
 */
export function tooltipRows(cell: CellPayload): [string, number | string][] {
  const summary = cell.summary;
  if ("median" in summary) {
    return [
      ["median", summary.median],
      ["mean", summary.mean],
      ["std_dev", summary.std_dev],
      ["p80", summary.p80],
    ];
  }
  if ("binned_average" in summary) {
    return summary.binned_average.map((v, i) => [`bin ${i}`, v]);
  }
  if ("average_counts" in summary) {
    return summary.average_counts.map((v, i) => [`category ${i}`, v]);
  }
  return summary.median_breakdown.map(([train, median]) => [train, median]);
}

export interface RenderedCell {
  caseId: string;
  metricId: string;
  lod: Lod;
  marks: ChartMarks;
  opacity: number;
  zIndex: number;
  clip: boolean;
}

export interface RenderedTable {
  caseOrder: string[];
  cells: RenderedCell[];
  decileRows: number[];
  samplingBadge: boolean;
}

/**
 * One declarative rendering pass: every visible cell's marks plus row-level
 * opacity, hover layering and table chrome. Cells without sampled detail
 * fall back to low level of detail rather than truncating.
 */
export function renderTable(
  payload: TablePayload,
  state: ViewState,
  highlighted?: Set<string>,
): RenderedTable {
  const lod = chooseLod(state.rowHeightPx, state.lodThresholdPx);
  const opacities = rowOpacities(payload.case_order, highlighted);
  const runIndices = payload.sampling.run_indices;
  const opts = { selectedRun: state.selectedRun, runOrder: state.runOrder };

  const cells: RenderedCell[] = [];
  for (const caseId of payload.case_order) {
    for (const column of payload.columns) {
      const cell = payload.cells[caseId]![column.metric_id]!;
      const cellLod: Lod = lod === "high" && cell.detail ? "high" : "low";
      let marks: ChartMarks;
      switch (column.family) {
        case "scalar":
          marks = renderLatenessChart(cell, cellLod, column.axis_range, runIndices, opts);
          break;
        case "profile":
          marks = renderProfileChart(cell, cellLod, column.axis_range, runIndices, opts);
          break;
        case "frequency":
          marks = renderFrequencyChart(cell, cellLod, runIndices, opts);
          break;
        case "affect":
          marks = renderAffectChart(cell, cellLod, runIndices, opts);
          break;
      }
      const layer = cellLayer(state, caseId, column.metric_id);
      cells.push({
        caseId,
        metricId: column.metric_id,
        lod: cellLod,
        marks,
        opacity: opacities[caseId]!,
        zIndex: layer.zIndex,
        clip: layer.clip,
      });
    }
  }
  return {
    caseOrder: [...payload.case_order],
    cells,
    decileRows: decileLineRows(payload),
    samplingBadge: showSamplingBadge(payload.sampling),
  };
}
