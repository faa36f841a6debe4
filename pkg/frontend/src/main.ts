import { ApiClient } from "./api.js";
import { AppState } from "./state.js";
import { htmlEl } from "./svg.js";
import { toOriginal } from "./types.js";
import { BarsView } from "./views/bars.js";
import { BoxesView } from "./views/boxes.js";
import { MapView } from "./views/map.js";
import { ProjectionsView } from "./views/projections.js";
import { SeriesView } from "./views/series.js";

export interface App {
  state: AppState;
  projections: ProjectionsView;
  map: MapView;
  bars: BarsView;
  boxes: BoxesView;
  series: SeriesView;
}

/**
 * Mount the coordinated-views explorer into a root element.
 * The service base URL comes from `?api=...`, defaulting to localhost:8000.
 */
export async function mountApp(root: HTMLElement, baseUrl: string): Promise<App> {
  const api = new ApiClient(baseUrl);
  const meta = await api.meta();
  const [projections, mapData] = await Promise.all([api.projections(), api.map()]);
  const state = new AppState(api, meta);

  root.innerHTML = "";
  const headline = htmlEl("div", "headline");
  headline.appendChild(
    htmlEl("h2", "", `urbanfuse explorer — session ${meta.session_hash.slice(0, 12)}`),
  );
  headline.appendChild(
    htmlEl("span", "subtitle", `${meta.n_nodes} nodes, k=${meta.k}; filters intersect the selection`),
  );
  root.appendChild(headline);

  const filterBar = htmlEl("div", "filter-bar");
  root.appendChild(filterBar);
  buildFilterWidgets(filterBar, state);

  const grid = htmlEl("div", "grid");
  const projEl = htmlEl("div", "view projections-view");
  const mapEl = htmlEl("div", "view map-view");
  const barsEl = htmlEl("div", "view bars-view");
  const boxesEl = htmlEl("div", "view boxes-view");
  const seriesEl = htmlEl("div", "view series-view");
  for (const el of [projEl, mapEl, barsEl, boxesEl, seriesEl]) grid.appendChild(el);
  root.appendChild(grid);

  const app: App = {
    state,
    projections: new ProjectionsView(projEl, state, projections),
    map: new MapView(mapEl, state, mapData),
    bars: new BarsView(barsEl, state),
    boxes: new BoxesView(boxesEl, state),
    series: new SeriesView(seriesEl, state),
  };
  await state.setSelection([], null); // load global-only stats
  return app;
}

/** Min/max inputs per static feature, in original units; empty input clears. */
function buildFilterWidgets(bar: HTMLElement, state: AppState): void {
  for (const feature of state.meta.static_features) {
    const wrap = htmlEl("label", "filter", feature.name + " ");
    const lo = document.createElement("input");
    const hi = document.createElement("input");
    for (const input of [lo, hi]) {
      input.type = "number";
      input.step = "any";
      input.className = "filter-input";
    }
    lo.placeholder = "min";
    hi.placeholder = "max";
    const apply = () => {
      if (lo.value === "" && hi.value === "") {
        state.setFilter(feature.name, null);
        return;
      }
      const lov = lo.value === "" ? -Infinity : Number(lo.value);
      const hiv = hi.value === "" ? Infinity : Number(hi.value);
      state.setFilter(feature.name, [lov, hiv]);
    };
    lo.addEventListener("change", apply);
    hi.addEventListener("change", apply);
    const hint = toOriginal(feature.norm, 0.5);
    lo.title = `e.g. around ${hint.toPrecision(3)}${feature.unit ? " " + feature.unit : ""}`;
    wrap.appendChild(lo);
    wrap.appendChild(hi);
    bar.appendChild(wrap);
  }
}

declare global {
  interface Window {
    urbanfuseApp?: Promise<App>;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? "http://127.0.0.1:8000";
  window.urbanfuseApp = mountApp(document.getElementById("app")!, base);
}
