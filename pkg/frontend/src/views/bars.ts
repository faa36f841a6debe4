import { linearScale } from "../geometry.js";
import type { AppState } from "../state.js";
import { clear, htmlEl, svgEl, GLOBAL_BLUE, SELECTED_RED } from "../svg.js";

const W = 200;
const H = 90;
const PAD_BOTTOM = 14;

/**
 * Frequency bars of the discrete static features: the global distribution in
 * blue with the selected subset overlaid in red. All counts come verbatim
 * from the stats response.
 */
export class BarsView {
  constructor(
    private container: HTMLElement,
    private state: AppState,
  ) {
    state.on("stats", () => this.render());
    this.render();
  }

  private render(): void {
    clear(this.container);
    this.container.appendChild(htmlEl("h3", "panel-title", "Discrete features"));
    const stats = this.state.stats;
    if (!stats) return;
    for (const bar of stats.bar_data) {
      const wrap = htmlEl("div", "bar-plot");
      wrap.appendChild(htmlEl("h4", "feature-title", bar.feature));
      const svg = svgEl("svg", {
        width: W,
        height: H,
        class: "bars",
        "data-feature": bar.feature,
      });
      const maxCount = Math.max(...bar.global_counts, 1);
      const sy = linearScale([0, maxCount], [0, H - PAD_BOTTOM]);
      const bw = (W - 4) / Math.max(bar.bins.length, 1);
      bar.bins.forEach((bin, i) => {
        const gh = sy(bar.global_counts[i]);
        svg.appendChild(
          svgEl("rect", {
            x: (2 + i * bw).toFixed(1),
            y: (H - PAD_BOTTOM - gh).toFixed(1),
            width: Math.max(bw - 3, 1).toFixed(1),
            height: gh.toFixed(1),
            fill: GLOBAL_BLUE,
            opacity: 0.55,
            class: "bar-global",
            "data-bin": bin,
            "data-count": bar.global_counts[i],
          }),
        );
        if (bar.selected_counts) {
          const sh = sy(bar.selected_counts[i]);
          svg.appendChild(
            svgEl("rect", {
              x: (2 + i * bw + (bw - 3) * 0.25).toFixed(1),
              y: (H - PAD_BOTTOM - sh).toFixed(1),
              width: Math.max((bw - 3) * 0.5, 1).toFixed(1),
              height: sh.toFixed(1),
              fill: SELECTED_RED,
              class: "bar-selected",
              "data-bin": bin,
              "data-count": bar.selected_counts[i],
            }),
          );
        }
        const label = svgEl("text", {
          x: (2 + i * bw + (bw - 3) / 2).toFixed(1),
          y: H - 2,
          "text-anchor": "middle",
          "font-size": 9,
        });
        label.textContent = String(bin);
        svg.appendChild(label);
      });
      wrap.appendChild(svg);
      this.container.appendChild(wrap);
    }
  }

  /** Sum of the red (selected) counts of one feature's bars (test hook). */
  selectedTotal(feature: string): number {
    const rects = this.container.querySelectorAll(
      `svg[data-feature="${feature}"] rect.bar-selected`,
    );
    let total = 0;
    rects.forEach((r) => (total += Number(r.getAttribute("data-count"))));
    return total;
  }
}
