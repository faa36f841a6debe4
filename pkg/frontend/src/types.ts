/** Response shapes of the explorer service (mirrors its pydantic models). */

export type ModelKey = "m1_static" | "m1_dynamic" | "m2" | "m3" | "m4";

export const MODEL_KEYS: ModelKey[] = ["m1_static", "m1_dynamic", "m2", "m3", "m4"];

export const MODEL_TITLES: Record<ModelKey, string> = {
  m1_static: "M1 Static",
  m1_dynamic: "M1 Dynamic",
  m2: "M2 (early)",
  m3: "M3 (late)",
  m4: "M4 (hierarchical)",
};

export interface NormInfo {
  scheme: string;
  offset: number;
  scale: number;
}

export interface FeatureInfo {
  name: string;
  unit: string | null;
  discrete: boolean;
  norm: NormInfo;
}

export interface SessionMeta {
  session_hash: string;
  n_nodes: number;
  models: ModelKey[];
  static_features: FeatureInfo[];
  time_axis: string[];
  k: number;
}

export interface ModelProjection {
  ids: number[];
  x: number[];
  y: number[];
  cluster: number[];
}

export interface ProjectionsResponse {
  session_hash: string;
  models: Record<ModelKey, ModelProjection>;
}

export interface MapPoint {
  id: number;
  lon: number;
  lat: number;
}

export interface MapResponse {
  session_hash: string;
  points: MapPoint[];
}

export interface SelectionRequest {
  node_ids: number[];
  source_model: ModelKey | null;
}

export interface BarData {
  feature: string;
  bins: number[];
  global_counts: number[];
  selected_counts: number[] | null;
}

export interface BoxStats {
  q1: number;
  median: number;
  q3: number;
  whisker_low: number;
  whisker_high: number;
  mean: number;
}

export interface Dispersion {
  global_std: number;
  selected_std: number | null;
  selected_values: number[];
}

export interface BoxData {
  feature: string;
  unit: string | null;
  norm: NormInfo;
  global_box: BoxStats;
  selected_box: BoxStats | null;
  dispersion: Dispersion;
}

export interface SeriesData {
  time_axis: string[];
  node_ids: number[];
  series: number[][];
  mean_series: number[];
}

export interface StatsResponse {
  session_hash: string;
  selection_size: number;
  source_model: ModelKey | null;
  map_points: MapPoint[];
  bar_data: BarData[];
  box_data: BoxData[];
  series_data: SeriesData;
}

export interface StaticValue {
  name: string;
  value: number;
  unit: string | null;
}

export interface NodeResponse {
  session_hash: string;
  id: number;
  lon: number;
  lat: number;
  static: StaticValue[];
  series: number[];
  time_axis: string[];
}

/** Denormalize a displayed value back to original units for hover labels. */
export function toOriginal(norm: NormInfo, value: number): number {
  return norm.offset + value * norm.scale;
}
