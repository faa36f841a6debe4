import { extent, linearScale } from "../geometry.js";
import type { AppState } from "../state.js";
import { clear, htmlEl, polylinePath, svgEl, SELECTED_RED } from "../svg.js";

const W = 560;
const H = 200;
const PAD = 18;

/**
 * Monthly count series of the selected nodes, one grey polyline per node with
 * the average trend on top in red. With nothing selected the global mean
 * series is shown alone.
 */
export class SeriesView {
  constructor(
    private container: HTMLElement,
    private state: AppState,
  ) {
    state.on("stats", () => this.render());
    this.render();
  }

  private render(): void {
    clear(this.container);
    this.container.appendChild(htmlEl("h3", "panel-title", "Crime time series"));
    const stats = this.state.stats;
    if (!stats) return;
    const sd = stats.series_data;
    const svg = svgEl("svg", { width: W, height: H, class: "series" });
    const t = sd.time_axis.length;
    const sx = linearScale([0, t - 1], [PAD, W - PAD]);
    const allValues = sd.series.flat().concat(sd.mean_series);
    const sy = linearScale(extent(allValues), [H - PAD, PAD]);
    const xs = Array.from({ length: t }, (_, i) => sx(i));

    sd.series.forEach((series, row) => {
      svg.appendChild(
        svgEl("path", {
          d: polylinePath(xs, series.map(sy)),
          fill: "none",
          stroke: "#9fb2bd",
          "stroke-width": 1,
          opacity: 0.6,
          class: "node-series",
          "data-id": sd.node_ids[row],
          "data-values": JSON.stringify(series),
        }),
      );
    });
    const mean = svgEl("path", {
      d: polylinePath(xs, sd.mean_series.map(sy)),
      fill: "none",
      stroke: SELECTED_RED,
      "stroke-width": 2,
      class: "mean-series",
      "data-values": JSON.stringify(sd.mean_series),
    });
    svg.appendChild(mean);

    for (const frac of [0, 0.5, 1]) {
      const i = Math.round(frac * (t - 1));
      const label = svgEl("text", {
        x: sx(i).toFixed(1),
        y: H - 4,
        "text-anchor": frac === 0 ? "start" : frac === 1 ? "end" : "middle",
        "font-size": 9,
        fill: "#666",
      });
      label.textContent = sd.time_axis[i];
      svg.appendChild(label);
    }
    this.container.appendChild(svg);
  }

  /** Path data of the mean line and of each per-node line (test hooks). */
  meanPath(): string | null {
    return this.container.querySelector("path.mean-series")?.getAttribute("d") ?? null;
  }

  nodePaths(): Map<number, string> {
    const out = new Map<number, string>();
    this.container.querySelectorAll("path.node-series").forEach((p) => {
      out.set(Number(p.getAttribute("data-id")), p.getAttribute("d") ?? "");
    });
    return out;
  }
}
