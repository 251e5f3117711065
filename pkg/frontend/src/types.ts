/**
 * Service payload shapes, mirrored verbatim from the HTTP API.
 *
 * The client never recomputes statistics: every number shown in the UI
 * comes from these payloads unchanged.
 */

export type MetricFamily = "scalar" | "profile" | "frequency" | "affect";

export interface ColumnPayload {
  metric_id: string;
  family: MetricFamily;
  /** presented axis range; degenerate ranges are widened server-side */
  axis_range: [number, number];
  overridden: boolean;
}

export interface ScalarSummary {
  median: number;
  mean: number;
  std_dev: number;
  p80: number;
}

export interface ProfileSummary {
  binned_average: number[];
}

export interface FrequencySummary {
  /** average stop count per lateness category, category order */
  average_counts: number[];
}

export interface AffectSummary {
  direction: string;
  /** [other_train_id, median seconds], descending */
  median_breakdown: [string, number][];
}

export type CellSummary =
  | ScalarSummary
  | ProfileSummary
  | FrequencySummary
  | AffectSummary;

export interface ScalarDetail {
  per_run_values: number[];
}

export interface ProfileDetail {
  /** per run: [journey position seconds, lateness seconds] points */
  per_run_series: [number, number][][];
}

export interface FrequencyDetail {
  /** per run: stop count per lateness category */
  per_run_counts: number[][];
}

export interface AffectDetail {
  /** per run: [other_train_id, seconds] contributions */
  per_run_breakdown: [string, number][][];
}

export type CellDetail =
  | ScalarDetail
  | ProfileDetail
  | FrequencyDetail
  | AffectDetail;

export interface CellPayload {
  summary: CellSummary;
  /** present only for rows included by the server-side render sample */
  detail?: CellDetail;
}

export interface SamplingPayload {
  row_stride: number;
  run_stride: number;
  /** the run indices whose detail values are present, ascending */
  run_indices: number[];
}

export interface DecilePayload {
  column: string;
  statistic: string;
  /** row indices (into case_order) after which a red decile line is drawn */
  boundaries: number[];
}

export interface TablePayload {
  ensemble_id: string;
  case_kind: string;
  case_order: string[];
  columns: ColumnPayload[];
  decile: DecilePayload | null;
  n_runs: number;
  sampling: SamplingPayload;
  cells: Record<string, Record<string, CellPayload>>;
}

export interface AffectingPayload {
  case_id: string;
  direction: "causes_delay_to" | "suffers_delay_from";
  /** other train -> [run index, seconds] occurrences */
  trains: Record<string, [number, number][]>;
  involved: string[];
}

export interface HistogramBin {
  start: number;
  end: number;
  counts: number;
}

export interface HistogramPayload {
  bin_minutes: number;
  bins: HistogramBin[];
}

export interface SortSpec {
  column: string;
  statistic: string;
  order: "asc" | "desc";
}

export interface FilterSpec {
  id_pattern?: string;
  categories?: string[];
  time_window?: [number, number];
}

export interface TableRequest {
  ensemble_id: string;
  case_kind: string;
  metric_ids: string[];
  sort?: SortSpec;
  filter?: FilterSpec;
  scale_overrides: Record<string, [number, number]>;
  max_rows: number;
  max_runs: number;
}
