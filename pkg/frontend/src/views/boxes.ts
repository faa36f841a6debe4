import { linearScale } from "../geometry.js";
import type { AppState } from "../state.js";
import { clear, htmlEl, svgEl, GLOBAL_BLUE, SELECTED_RED } from "../svg.js";
import { toOriginal, BoxStats } from "../types.js";

const ROW_H = 26;
const W = 420;
const BOX_W = 130;
const GAP = 14;

/**
 * Static feature distributions in min-max display space: global box, selected
 * box, and a dispersion strip overlaying selected values on the global
 * mean +/- std band. Hovering a mark shows the original-unit value.
 */
export class BoxesView {
  constructor(
    private container: HTMLElement,
    private state: AppState,
  ) {
    state.on("stats", () => this.render());
    this.render();
  }

  private render(): void {
    clear(this.container);
    this.container.appendChild(htmlEl("h3", "panel-title", "Static features"));
    const stats = this.state.stats;
    if (!stats) return;
    const svg = svgEl("svg", {
      width: W,
      height: (stats.box_data.length + 1) * ROW_H,
      class: "boxes",
    });
    const header = svgEl("text", { x: 4, y: 12, "font-size": 10, fill: "#666" });
    header.textContent = "feature | global | selected | dispersion";
    svg.appendChild(header);
    stats.box_data.forEach((box, row) => {
      const y = (row + 1) * ROW_H + ROW_H / 2;
      const label = svgEl("text", {
        x: 4,
        y: y + 3,
        "font-size": 10,
        class: "feature-label",
      });
      label.textContent = box.feature;
      svg.appendChild(label);

      const gx = linearScale([0, 1], [120, 120 + BOX_W]);
      this.drawBox(svg, gx, y, box.global_box, GLOBAL_BLUE, box.feature, "global", box.norm);
      if (box.selected_box) {
        const sx = linearScale([0, 1], [120 + BOX_W + GAP, 120 + 2 * BOX_W + GAP]);
        this.drawBox(svg, sx, y, box.selected_box, SELECTED_RED, box.feature, "selected", box.norm);
      }
      // dispersion strip: global mean +/- std band, selected values as dots
      const dx = linearScale([0, 1], [120 + 2 * (BOX_W + GAP), W - 8]);
      const g = box.global_box;
      const bandLo = Math.max(0, g.mean - box.dispersion.global_std);
      const bandHi = Math.min(1, g.mean + box.dispersion.global_std);
      svg.appendChild(
        svgEl("rect", {
          x: dx(bandLo).toFixed(1),
          y: (y - 5).toFixed(1),
          width: Math.max(dx(bandHi) - dx(bandLo), 0.5).toFixed(1),
          height: 10,
          fill: GLOBAL_BLUE,
          opacity: 0.25,
          class: "dispersion-band",
        }),
      );
      box.dispersion.selected_values.forEach((v, i) => {
        const dot = svgEl("circle", {
          cx: dx(Math.min(Math.max(v, 0), 1)).toFixed(1),
          cy: y,
          r: 2,
          fill: SELECTED_RED,
          opacity: 0.7,
          class: "dispersion-dot",
          "data-feature": box.feature,
          "data-row": i,
          "data-value": v,
          "data-original": toOriginal(box.norm, v),
        });
        const title = svgEl("title");
        title.textContent = `${box.feature}: ${toOriginal(box.norm, v).toPrecision(6)}${
          box.unit ? " " + box.unit : ""
        }`;
        dot.appendChild(title);
        svg.appendChild(dot);
      });
    });
    this.container.appendChild(svg);
  }

  private drawBox(
    svg: SVGSVGElement,
    scale: (v: number) => number,
    y: number,
    stats: BoxStats,
    color: string,
    feature: string,
    kind: string,
    norm: { scheme: string; offset: number; scale: number },
  ): void {
    const line = (x1: number, x2: number, cls: string) =>
      svg.appendChild(
        svgEl("line", {
          x1: scale(x1).toFixed(1),
          y1: y,
          x2: scale(x2).toFixed(1),
          y2: y,
          stroke: color,
          "stroke-width": 1,
          class: cls,
        }),
      );
    line(stats.whisker_low, stats.q1, "whisker");
    line(stats.q3, stats.whisker_high, "whisker");
    const rect = svgEl("rect", {
      x: scale(stats.q1).toFixed(1),
      y: (y - 6).toFixed(1),
      width: Math.max(scale(stats.q3) - scale(stats.q1), 0.5).toFixed(1),
      height: 12,
      fill: color,
      opacity: 0.35,
      stroke: color,
      class: `box box-${kind}`,
      "data-feature": feature,
      "data-median": stats.median,
      "data-q1": stats.q1,
      "data-q3": stats.q3,
      "data-mean": stats.mean,
      "data-median-original": toOriginal(norm, stats.median),
    });
    const title = svgEl("title");
    title.textContent = `${feature} ${kind} median: ${toOriginal(norm, stats.median).toPrecision(6)}`;
    rect.appendChild(title);
    svg.appendChild(rect);
    svg.appendChild(
      svgEl("line", {
        x1: scale(stats.median).toFixed(1),
        y1: (y - 6).toFixed(1),
        x2: scale(stats.median).toFixed(1),
        y2: (y + 6).toFixed(1),
        stroke: color,
        "stroke-width": 1.5,
        class: "median",
      }),
    );
  }
}
