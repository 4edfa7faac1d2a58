// Thin client for the /v1 API. Concurrent fetches for the same view key
// carry a sequence number; a response that arrives after a newer request
// for the same key has already been issued is reported stale so callers
// can discard it instead of overwriting fresher data.

import type {
  AlertsPayload,
  ChannelExpr,
  ClusterDetailPayload,
  EntityPagePayload,
  EvaluatePayload,
  GeoJsonPayload,
  GraphPayload,
  SeriesPayload,
  TopStoriesPayload,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

export interface ApiResult<T> {
  data: T;
  stale: boolean;
}

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

export class ApiClient {
  private sequence = 0;
  private newestIssued = new Map<string, number>();

  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike,
  ) {}

  private async request<T>(key: string, url: string, init?: RequestInit): Promise<ApiResult<T>> {
    const mySeq = ++this.sequence;
    this.newestIssued.set(key, mySeq);
    const response = await this.fetchFn(this.baseUrl + url, init);
    if (!response.ok) {
      throw new ApiError(`${url} failed with ${response.status}`, response.status);
    }
    const data = (await response.json()) as T;
    const newest = this.newestIssued.get(key) ?? mySeq;
    return { data, stale: newest > mySeq };
  }

  topStories(language: string, n = 10): Promise<ApiResult<TopStoriesPayload>> {
    return this.request("top-stories", `/v1/top-stories?lang=${encodeURIComponent(language)}&n=${n}`);
  }

  clusterDetail(clusterId: string): Promise<ApiResult<ClusterDetailPayload>> {
    return this.request(`cluster:${clusterId}`, `/v1/clusters/${encodeURIComponent(clusterId)}`);
  }

  alerts(): Promise<ApiResult<AlertsPayload>> {
    return this.request("alerts", "/v1/alerts");
  }

  series(
    country: string,
    category: string,
    start: string,
    end: string,
  ): Promise<ApiResult<SeriesPayload>> {
    const params = new URLSearchParams({ country, category, resolution: "day", start, end });
    return this.request("series", `/v1/series?${params.toString()}`);
  }

  entityPage(entityId: number): Promise<ApiResult<EntityPagePayload>> {
    return this.request(`entity:${entityId}`, `/v1/entities/${entityId}`);
  }

  egoGraph(entityIds: number[], n = 100): Promise<ApiResult<GraphPayload>> {
    const params = entityIds.map((id) => `entity=${id}`).join("&");
    return this.request("ego", `/v1/graph/ego?${params}&n=${n}`);
  }

  quoteGraph(): Promise<ApiResult<GraphPayload>> {
    return this.request("quotes", "/v1/graph/quotes");
  }

  evaluate(expr: ChannelExpr, limit = 50): Promise<ApiResult<EvaluatePayload>> {
    return this.request(`evaluate:${JSON.stringify(expr)}`, `/v1/channels/evaluate?limit=${limit}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ expr }),
    });
  }

  mapGeoJson(): Promise<ApiResult<GeoJsonPayload>> {
    return this.request("map", "/v1/export/map.geojson");
  }
}
