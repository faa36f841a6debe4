export type Point = [number, number];

/**
 * Even-odd rule point-in-polygon test.
 *
 * Casts a ray to +x and counts edge crossings; boundary behavior follows the
 * half-open convention, which is stable for lasso selection.
 */
export function pointInPolygon(point: Point, polygon: Point[]): boolean {
  if (polygon.length < 3) return false;
  const [px, py] = point;
  let inside = false;
  for (let i = 0, j = polygon.length - 1; i < polygon.length; j = i++) {
    const [xi, yi] = polygon[i];
    const [xj, yj] = polygon[j];
    const crosses = yi > py !== yj > py;
    if (crosses && px < ((xj - xi) * (py - yi)) / (yj - yi) + xi) {
      inside = !inside;
    }
  }
  return inside;
}

/** Degenerate lassos (fewer than 3 vertices, or zero area) select nothing. */
export function isDegenerate(polygon: Point[]): boolean {
  if (polygon.length < 3) return true;
  let area = 0;
  for (let i = 0, j = polygon.length - 1; i < polygon.length; j = i++) {
    area += (polygon[j][0] + polygon[i][0]) * (polygon[j][1] - polygon[i][1]);
  }
  return area === 0;
}

/** Ids of the points lying inside the lasso polygon. */
export function idsInsidePolygon(
  ids: number[],
  xs: number[],
  ys: number[],
  polygon: Point[],
): number[] {
  if (isDegenerate(polygon)) return [];
  const out: number[] = [];
  for (let i = 0; i < ids.length; i++) {
    if (pointInPolygon([xs[i], ys[i]], polygon)) out.push(ids[i]);
  }
  return out;
}

export interface LinearScale {
  (v: number): number;
  invert(v: number): number;
}

/** Minimal linear scale with a stable degenerate-domain fallback. */
export function linearScale(
  domain: [number, number],
  range: [number, number],
): LinearScale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 === 0 ? 1 : d1 - d0;
  const scale = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as LinearScale;
  scale.invert = (v: number) => d0 + ((v - r0) / (r1 - r0 === 0 ? 1 : r1 - r0)) * span;
  return scale;
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!isFinite(lo)) return [0, 1];
  return lo === hi ? [lo - 0.5, hi + 0.5] : [lo, hi];
}
