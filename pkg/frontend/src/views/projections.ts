import { extent, idsInsidePolygon, linearScale, Point } from "../geometry.js";
import type { AppState } from "../state.js";
import { clear, clusterColor, htmlEl, polylinePath, svgEl, SELECTED_RED } from "../svg.js";
import { MODEL_KEYS, MODEL_TITLES, ModelKey, ProjectionsResponse } from "../types.js";

const W = 240;
const H = 220;
const PAD = 10;

/**
 * Five linked 2-D scatter plots, one per fusion model, with lasso selection.
 * A lasso drawn in any plot replaces the shared selection; the id set is then
 * highlighted identically in every plot.
 */
export class ProjectionsView {
  private panels = new Map<ModelKey, SVGSVGElement>();
  private screen = new Map<ModelKey, { ids: number[]; xs: number[]; ys: number[] }>();
  private lasso: Point[] = [];
  private lassoModel: ModelKey | null = null;

  constructor(
    private container: HTMLElement,
    private state: AppState,
    private projections: ProjectionsResponse,
  ) {
    this.build();
    state.on("selection", () => this.highlight());
    state.on("filters", () => this.highlight());
    state.on("stats", () => this.highlight());
  }

  private build(): void {
    clear(this.container);
    for (const model of MODEL_KEYS) {
      const proj = this.projections.models[model];
      if (!proj) continue;
      const wrap = htmlEl("div", "panel projection-panel");
      wrap.appendChild(htmlEl("h3", "panel-title", MODEL_TITLES[model]));
      const svg = svgEl("svg", {
        width: W,
        height: H,
        "data-model": model,
        class: "projection",
      });
      const sx = linearScale(extent(proj.x), [PAD, W - PAD]);
      const sy = linearScale(extent(proj.y), [H - PAD, PAD]);
      const xs = proj.x.map(sx);
      const ys = proj.y.map(sy);
      this.screen.set(model, { ids: proj.ids, xs, ys });
      for (let i = 0; i < proj.ids.length; i++) {
        svg.appendChild(
          svgEl("circle", {
            cx: xs[i].toFixed(2),
            cy: ys[i].toFixed(2),
            r: 2.4,
            fill: clusterColor(proj.cluster[i]),
            "data-id": proj.ids[i],
            class: "pt",
          }),
        );
      }
      this.attachLasso(svg, model);
      wrap.appendChild(svg);
      this.container.appendChild(wrap);
      this.panels.set(model, svg);
    }
    this.highlight();
  }

  private attachLasso(svg: SVGSVGElement, model: ModelKey): void {
    const toLocal = (ev: PointerEvent): Point => {
      const rect = svg.getBoundingClientRect();
      return [ev.clientX - rect.left, ev.clientY - rect.top];
    };
    svg.addEventListener("pointerdown", (ev) => {
      this.lasso = [toLocal(ev)];
      this.lassoModel = model;
      svg.setPointerCapture(ev.pointerId);
    });
    svg.addEventListener("pointermove", (ev) => {
      if (this.lassoModel !== model) return;
      this.lasso.push(toLocal(ev));
      this.drawLasso(svg);
    });
    svg.addEventListener("pointerup", () => {
      if (this.lassoModel !== model) return;
      const polygon = this.lasso;
      this.lasso = [];
      this.lassoModel = null;
      this.eraseLasso(svg);
      void this.applyLasso(model, polygon);
    });
  }

  private drawLasso(svg: SVGSVGElement): void {
    this.eraseLasso(svg);
    const path = svgEl("path", {
      d: polylinePath(this.lasso.map((p) => p[0]), this.lasso.map((p) => p[1])) + "Z",
      class: "lasso",
      fill: "rgba(204,51,68,0.08)",
      stroke: SELECTED_RED,
      "stroke-dasharray": "4 3",
    });
    svg.appendChild(path);
  }

  private eraseLasso(svg: SVGSVGElement): void {
    svg.querySelectorAll(".lasso").forEach((el) => el.remove());
  }

  /** Resolve a lasso polygon (screen coords) to node ids and update the selection. */
  applyLasso(model: ModelKey, polygon: Point[]): Promise<void> {
    const screen = this.screen.get(model);
    if (!screen) return Promise.resolve();
    const ids = idsInsidePolygon(screen.ids, screen.xs, screen.ys, polygon);
    return this.state.setSelection(ids, ids.length ? model : null);
  }

  private highlight(): void {
    const selected = new Set(this.state.effectiveIds());
    for (const svg of this.panels.values()) {
      svg.querySelectorAll("circle.pt, circle.pt.selected").forEach((c) => {
        const id = Number(c.getAttribute("data-id"));
        if (selected.has(id)) {
          c.classList.add("selected");
          c.setAttribute("r", "3.2");
          c.setAttribute("stroke", SELECTED_RED);
          c.setAttribute("stroke-width", "1.4");
        } else {
          c.classList.remove("selected");
          c.setAttribute("r", "2.4");
          c.removeAttribute("stroke");
          c.removeAttribute("stroke-width");
        }
      });
    }
  }

  /** Screen-space positions of one panel's points (drives lasso resolution). */
  screenPoints(model: ModelKey): { ids: number[]; xs: number[]; ys: number[] } | undefined {
    return this.screen.get(model);
  }

  /** Ids currently marked as selected in one panel (test hook). */
  highlightedIds(model: ModelKey): number[] {
    const svg = this.panels.get(model);
    if (!svg) return [];
    return [...svg.querySelectorAll("circle.pt.selected")].map((c) =>
      Number(c.getAttribute("data-id")),
    );
  }
}
