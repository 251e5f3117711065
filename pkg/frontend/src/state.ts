/**
 * View state and its pure reducers.
 *
 * Semantic zoom changes only the representation of rows (row height and
 * the resulting level of detail), never column widths or axis scales; sort,
 * scale overrides and filters round-trip through the service as a new table
 * request that preserves everything not being changed.
 */

import type { FilterSpec, SortSpec, TableRequest } from "./types.js";

export type Lod = "low" | "high";

export const DEFAULT_LOD_THRESHOLD = 40;
export const MIN_ROW_HEIGHT = 1;
export const DEFAULT_MAX_ROWS = 2000;
export const DEFAULT_MAX_RUNS = 500;

export interface HoveredCell {
  caseId: string;
  metricId: string;
}

export interface HighlightSelection {
  caseId: string;
  direction: "causes_delay_to" | "suffers_delay_from";
}

export interface ViewState {
  ensembleId: string;
  caseKind: string;
  metricIds: string[];
  sort?: SortSpec;
  filter?: FilterSpec;
  scaleOverrides: Record<string, [number, number]>;
  /** continuous row height in pixels; never below MIN_ROW_HEIGHT */
  rowHeightPx: number;
  lodThresholdPx: number;
  /** viewport height available for rows, used for the sampling budget */
  viewportPx: number;
  selectedRun?: number;
  highlight?: HighlightSelection;
  hovered?: HoveredCell;
  /** high-LoD run ordering: cross-chart alignment by default */
  runOrder: "run_index" | "by_value";
}

export function initialViewState(ensembleId: string, metricIds: string[]): ViewState {
  return {
    ensembleId,
    caseKind: "train",
    metricIds,
    scaleOverrides: {},
    rowHeightPx: DEFAULT_LOD_THRESHOLD,
    lodThresholdPx: DEFAULT_LOD_THRESHOLD,
    viewportPx: 800,
    runOrder: "run_index",
  };
}

/** High iff the row is at least as tall as the threshold (boundary inclusive). */
export function chooseLod(rowHeightPx: number, lodThresholdPx: number): Lod {
  if (rowHeightPx < MIN_ROW_HEIGHT) {
    throw new RangeError(`row height ${rowHeightPx}px below ${MIN_ROW_HEIGHT}px`);
  }
  return rowHeightPx >= lodThresholdPx ? "high" : "low";
}

/** Vertical zoom: changes row height only, clamped to the 1 px floor. */
export function zoom(state: ViewState, factor: number): ViewState {
  return {
    ...state,
    rowHeightPx: Math.max(MIN_ROW_HEIGHT, state.rowHeightPx * factor),
  };
}

/** Fit all rows into the viewport without ever dropping below 1 px per row. */
export function fitRowHeight(viewportPx: number, nCases: number): number {
  if (nCases <= 0) return MIN_ROW_HEIGHT;
  return Math.max(MIN_ROW_HEIGHT, viewportPx / nCases);
}

/**
 * Row budget for the table request: at 1 px per row the viewport can show at
 * most this many cases; beyond that the service samples rows (stride > 1)
 * rather than the client silently truncating.
 */
export function maxRowsFor(viewportPx: number): number {
  return Math.max(1, Math.floor(viewportPx));
}

export function setSort(state: ViewState, sort: SortSpec): ViewState {
  return { ...state, sort };
}

export function setFilter(state: ViewState, filter?: FilterSpec): ViewState {
  return { ...state, filter };
}

export function setScaleOverride(
  state: ViewState,
  metricId: string,
  range?: [number, number],
): ViewState {
  const scaleOverrides = { ...state.scaleOverrides };
  if (range) scaleOverrides[metricId] = range;
  else delete scaleOverrides[metricId];
  return { ...state, scaleOverrides };
}

export function selectRun(state: ViewState, run?: number): ViewState {
  return { ...state, selectedRun: run };
}

export function setHighlight(state: ViewState, highlight?: HighlightSelection): ViewState {
  return { ...state, highlight };
}

export function setHovered(state: ViewState, hovered?: HoveredCell): ViewState {
  return { ...state, hovered };
}

/** Temporal brush on the footer histogram: a time-window filter that keeps
 * sort and scale overrides untouched. */
export function brushTimeWindow(state: ViewState, window?: [number, number]): ViewState {
  const filter: FilterSpec = { ...state.filter, time_window: window };
  if (window === undefined) delete filter.time_window;
  const empty = Object.keys(filter).length === 0;
  return { ...state, filter: empty ? undefined : filter };
}

/** The service request implied by the current view; pure and total. */
export function buildTableRequest(state: ViewState): TableRequest {
  const request: TableRequest = {
    ensemble_id: state.ensembleId,
    case_kind: state.caseKind,
    metric_ids: [...state.metricIds],
    scale_overrides: { ...state.scaleOverrides },
    max_rows: Math.min(DEFAULT_MAX_ROWS, maxRowsFor(state.viewportPx)),
    max_runs: DEFAULT_MAX_RUNS,
  };
  if (state.sort) request.sort = { ...state.sort };
  if (state.filter) request.filter = { ...state.filter };
  return request;
}

/** A sampling badge is shown whenever the service applied any stride. */
export function showSamplingBadge(sampling: {
  row_stride: number;
  run_stride: number;
}): boolean {
  return sampling.row_stride > 1 || sampling.run_stride > 1;
}
