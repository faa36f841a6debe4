import type {
  MapResponse,
  NodeResponse,
  ProjectionsResponse,
  SelectionRequest,
  SessionMeta,
  StatsResponse,
} from "./types.js";

/** Thin typed client over the read-only session API. */
export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await fetch(this.baseUrl + path);
    if (!resp.ok) throw new Error(`GET ${path}: ${resp.status}`);
    return (await resp.json()) as T;
  }

  meta(): Promise<SessionMeta> {
    return this.get<SessionMeta>("/session/meta");
  }

  projections(): Promise<ProjectionsResponse> {
    return this.get<ProjectionsResponse>("/projections");
  }

  map(): Promise<MapResponse> {
    return this.get<MapResponse>("/map");
  }

  node(id: number): Promise<NodeResponse> {
    return this.get<NodeResponse>(`/node/${id}`);
  }

  async stats(request: SelectionRequest): Promise<StatsResponse> {
    const resp = await fetch(this.baseUrl + "/stats", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    if (!resp.ok) throw new Error(`POST /stats: ${resp.status}`);
    return (await resp.json()) as StatsResponse;
  }
}
