const SVG_NS = "http://www.w3.org/2000/svg";

export function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, String(v));
  return el;
}

export function htmlEl<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const el = document.createElement(tag);
  if (className) el.className = className;
  if (text) el.textContent = text;
  return el;
}

export function clear(el: Element): void {
  while (el.firstChild) el.removeChild(el.firstChild);
}

/** Categorical palette for k-means cluster coloring (12 hues). */
export const CLUSTER_COLORS = [
  "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2",
  "#edc948", "#ff9da7", "#9c755f", "#bab0ac", "#2f4b7c", "#84cc16",
];

export const GLOBAL_BLUE = "#4477aa";
export const SELECTED_RED = "#cc3344";

export function clusterColor(c: number): string {
  return CLUSTER_COLORS[((c % CLUSTER_COLORS.length) + CLUSTER_COLORS.length) % CLUSTER_COLORS.length];
}

export function polylinePath(xs: number[], ys: number[]): string {
  let d = "";
  for (let i = 0; i < xs.length; i++) {
    d += (i === 0 ? "M" : "L") + xs[i].toFixed(2) + "," + ys[i].toFixed(2);
  }
  return d;
}
