/** Pixel scales. Column widths are fixed; only row height responds to zoom. */

export interface LinearScale {
  domain: [number, number];
  range: [number, number];
  (value: number): number;
}

export function linearScale(
  domain: [number, number],
  range: [number, number],
): LinearScale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const scale = ((value: number) =>
    r0 + ((value - d0) / span) * (r1 - r0)) as LinearScale;
  scale.domain = domain;
  scale.range = range;
  return scale;
}

/** Clamp a value into the domain, reporting whether it overflowed. */
export function clampToDomain(
  value: number,
  domain: [number, number],
): { value: number; overflow: boolean } {
  if (value < domain[0]) return { value: domain[0], overflow: true };
  if (value > domain[1]) return { value: domain[1], overflow: true };
  return { value, overflow: false };
}
