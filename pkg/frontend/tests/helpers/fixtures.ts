import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type {
  MapResponse,
  ProjectionsResponse,
  SessionMeta,
  StatsResponse,
} from "../../src/types.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const FIXTURES = join(HERE, "..", "fixtures");

export function loadJson<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

export const meta = () => loadJson<SessionMeta>("meta.json");
export const projections = () => loadJson<ProjectionsResponse>("projections.json");
export const mapData = () => loadJson<MapResponse>("map.json");
export const statsEmpty = () => loadJson<StatsResponse>("stats_empty.json");
export const statsSelections = () => loadJson<StatsResponse[]>("stats_selections.json");
export const selections = () => loadJson<number[][]>("selections.json");

export interface CsvTable {
  header: string[];
  /** row values per node id, column order matching header */
  rows: Map<number, number[]>;
}

/** Minimal CSV reader for the session fixtures (numeric cells, id first). */
export function loadCsv(name: string): CsvTable {
  const text = readFileSync(join(FIXTURES, "session", name), "utf-8").trimEnd();
  const lines = text.split("\n");
  const header = lines[0].split(",").slice(1);
  const rows = new Map<number, number[]>();
  for (const line of lines.slice(1)) {
    const cells = line.split(",");
    rows.set(Number(cells[0]), cells.slice(1).map(Number));
  }
  return { header, rows };
}

export interface NormFile {
  scheme: string;
  static_offset: number[];
  static_scale: number[];
  dynamic_offset: number[];
  dynamic_scale: number[];
}

export function loadNormalization(): NormFile {
  return JSON.parse(
    readFileSync(join(FIXTURES, "session", "normalization.json"), "utf-8"),
  ) as NormFile;
}

/** Linear-interpolation percentile matching numpy's default method. */
export function percentile(sortedValues: number[], q: number): number {
  const n = sortedValues.length;
  if (n === 1) return sortedValues[0];
  const pos = (q / 100) * (n - 1);
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  if (lo === hi) return sortedValues[lo];
  return sortedValues[lo] + (sortedValues[hi] - sortedValues[lo]) * (pos - lo);
}

export function mean(values: number[]): number {
  return values.reduce((s, v) => s + v, 0) / values.length;
}

export function std(values: number[]): number {
  const m = mean(values);
  return Math.sqrt(mean(values.map((v) => (v - m) * (v - m))));
}
