/** Color conventions shared by all mini-charts. */

/** Lateness category colors: greens below one minute, darkening reds above. */
export const CATEGORY_COLORS: readonly string[] = [
  "#81c784", // early
  "#43a047", // 0-1min
  "#ffcdd2", // 1-3min
  "#ef9a9a", // 3-5min
  "#e57373", // 5-10min
  "#d32f2f", // 10-20min
  "#7f0000", // 20+min
];

export const CATEGORY_LABELS: readonly string[] = [
  "early",
  "0-1min",
  "1-3min",
  "3-5min",
  "5-10min",
  "10-20min",
  "20+min",
];

/** 20-color categorical palette (tab20 hues). */
export const TRAIN_PALETTE: readonly string[] = [
  "#1f77b4", "#aec7e8", "#ff7f0e", "#ffbb78", "#2ca02c",
  "#98df8a", "#d62728", "#ff9896", "#9467bd", "#c5b0d5",
  "#8c564b", "#c49c94", "#e377c2", "#f7b6d2", "#7f7f7f",
  "#c7c7c7", "#bcbd22", "#dbdb8d", "#17becf", "#9edae5",
];

/** 32-bit FNV-1a over the UTF-8 bytes of the id. */
export function hashId(id: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < id.length; i++) {
    h ^= id.charCodeAt(i);
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h;
}

/**
 * Stable categorical hue per train: the same id maps to the same color in
 * every cell, chart and session. Collisions over the 20-color palette are
 * accepted.
 */
export function trainColor(trainId: string): string {
  return TRAIN_PALETTE[hashId(trainId) % TRAIN_PALETTE.length]!;
}

/**
 * Diverging blue (early) / neutral (on time) / red (late) scale for profile
 * strips, symmetric about zero over [-vmax, +vmax].
 */
export function divergingColor(value: number, vmax: number): string {
  const span = Math.max(vmax, 1);
  const t = Math.max(-1, Math.min(1, value / span));
  // interpolate white -> #b2182b for late, white -> #2166ac for early
  const mix = (a: number, b: number, f: number) => Math.round(a + (b - a) * f);
  const f = Math.abs(t);
  const [r, g, b] =
    t >= 0
      ? [mix(255, 178, f), mix(255, 24, f), mix(255, 43, f)]
      : [mix(255, 33, f), mix(255, 102, f), mix(255, 172, f)];
  return `rgb(${r},${g},${b})`;
}
