import { extent, linearScale } from "../geometry.js";
import type { AppState } from "../state.js";
import { clear, htmlEl, svgEl, SELECTED_RED } from "../svg.js";
import type { MapResponse } from "../types.js";

const W = 360;
const H = 300;
const PAD = 12;

/**
 * Tile-less geographic scatter of all nodes (lon/lat, aspect-corrected).
 * Selected nodes are drawn on top in red. Works fully offline.
 */
export class MapView {
  private svg: SVGSVGElement;

  constructor(
    private container: HTMLElement,
    private state: AppState,
    private mapData: MapResponse,
  ) {
    clear(container);
    container.appendChild(htmlEl("h3", "panel-title", "Map"));
    this.svg = svgEl("svg", { width: W, height: H, class: "map" });
    container.appendChild(this.svg);
    this.render();
    state.on("selection", () => this.render());
    state.on("filters", () => this.render());
    state.on("stats", () => this.render());
  }

  private render(): void {
    clear(this.svg);
    const pts = this.mapData.points;
    const meanLat = pts.reduce((s, p) => s + p.lat, 0) / Math.max(pts.length, 1);
    const aspect = Math.cos((meanLat * Math.PI) / 180);
    const sx = linearScale(extent(pts.map((p) => p.lon * aspect)), [PAD, W - PAD]);
    const sy = linearScale(extent(pts.map((p) => p.lat)), [H - PAD, PAD]);
    const selected = new Set(this.state.effectiveIds());
    const deferred: SVGElement[] = [];
    for (const p of pts) {
      const isSel = selected.has(p.id);
      const c = svgEl("circle", {
        cx: sx(p.lon * aspect).toFixed(2),
        cy: sy(p.lat).toFixed(2),
        r: isSel ? 3 : 1.6,
        fill: isSel ? SELECTED_RED : "#b8c4cc",
        "data-id": p.id,
        class: isSel ? "node selected" : "node",
      });
      if (isSel) deferred.push(c);
      else this.svg.appendChild(c);
    }
    for (const c of deferred) this.svg.appendChild(c); // selection on top
  }

  highlightedIds(): number[] {
    return [...this.svg.querySelectorAll("circle.node.selected")].map((c) =>
      Number(c.getAttribute("data-id")),
    );
  }
}
