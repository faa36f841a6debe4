import type { ApiClient } from "./api.js";
import type { ModelKey, SessionMeta, StatsResponse } from "./types.js";
import { toOriginal } from "./types.js";

export interface Selection {
  ids: number[];
  source: ModelKey | null;
}

export type FilterRanges = Map<string, [number, number]>; // original units

type Listener = () => void;

/**
 * Shared view state: one selection rendered identically in every view, the
 * latest stats response, and per-feature filter ranges that *intersect* the
 * selection (filters never replace it).
 *
 * Stats requests are latest-wins: a response is dropped if a newer selection
 * was issued while it was in flight.
 */
export class AppState {
  selection: Selection = { ids: [], source: null };
  stats: StatsResponse | null = null;
  hoverNode: number | null = null;
  filters: FilterRanges = new Map();

  private listeners = new Map<string, Set<Listener>>();
  private requestToken = 0;

  constructor(
    readonly api: ApiClient,
    readonly meta: SessionMeta,
  ) {}

  on(event: "selection" | "stats" | "hover" | "filters", fn: Listener): void {
    if (!this.listeners.has(event)) this.listeners.set(event, new Set());
    this.listeners.get(event)!.add(fn);
  }

  private emit(event: string): void {
    for (const fn of this.listeners.get(event) ?? []) fn();
  }

  /** Replace the selection (empty list clears it) and refresh linked stats. */
  async setSelection(ids: number[], source: ModelKey | null): Promise<void> {
    const unique = [...new Set(ids)].sort((a, b) => a - b);
    this.selection = { ids: unique, source };
    this.emit("selection");
    const token = ++this.requestToken;
    const stats = await this.api.stats({ node_ids: unique, source_model: source });
    if (token !== this.requestToken) return; // a newer request superseded this one
    this.stats = stats;
    this.emit("stats");
  }

  setHover(id: number | null): void {
    this.hoverNode = id;
    this.emit("hover");
  }

  setFilter(feature: string, range: [number, number] | null): void {
    if (range === null) this.filters.delete(feature);
    else this.filters.set(feature, range);
    this.emit("filters");
  }

  /**
   * Selected ids that also pass every active filter (in original units).
   * With no active filters this is exactly the selection.
   */
  effectiveIds(): number[] {
    const stats = this.stats;
    if (!stats || this.filters.size === 0 || stats.selection_size === 0) {
      return this.selection.ids;
    }
    const keep = new Set(stats.series_data.node_ids);
    for (const [feature, [lo, hi]] of this.filters) {
      const box = stats.box_data.find((b) => b.feature === feature);
      if (!box) continue;
      const values = box.dispersion.selected_values;
      stats.series_data.node_ids.forEach((id, row) => {
        const original = toOriginal(box.norm, values[row]);
        if (original < lo || original > hi) keep.delete(id);
      });
    }
    return this.selection.ids.filter((id) => keep.has(id));
  }
}
