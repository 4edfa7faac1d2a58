// Test scaffolding: recorded /v1 payloads (captured from the real engine
// over a staged synthetic corpus) served through a fake fetch.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { FetchLike } from "../src/api.js";
import type { StorageLike } from "../src/channels.js";

const FIXTURE_DIR = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURE_DIR, `${name}.json`), "utf-8")) as T;
}

function respond(status: number, payload: unknown) {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: () => Promise.resolve(payload),
  };
}

export interface FakeBackend {
  fetch: FetchLike;
  requests: { url: string; body?: unknown }[];
}

// Routes requests to the recorded payloads. Channel evaluations match on
// the canonicalized expression, so a view only gets articles if it sends
// exactly the expression the API documented for that aggregate.
export function fakeBackend(): FakeBackend {
  const evaluations = [
    fixture<{ expr: unknown }>("evaluate_alert_cell"),
    fixture<{ expr: unknown }>("evaluate_entity_1"),
    fixture<{ expr: unknown }>("evaluate_entity_2"),
    fixture<{ expr: unknown }>("evaluate_flooding_en"),
  ];
  const requests: { url: string; body?: unknown }[] = [];
  const clusterDetail = fixture<{ id: string }>("cluster_detail");

  const fetchImpl: FetchLike = (url, init) => {
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    requests.push({ url, body });
    const path = url.split("?")[0];
    if (path === "/v1/top-stories") return Promise.resolve(respond(200, fixture("top_stories")));
    if (path === `/v1/clusters/${clusterDetail.id}`) {
      return Promise.resolve(respond(200, clusterDetail));
    }
    if (path === "/v1/alerts") return Promise.resolve(respond(200, fixture("alerts")));
    if (path === "/v1/series") return Promise.resolve(respond(200, fixture("series")));
    if (path === "/v1/entities/1") return Promise.resolve(respond(200, fixture("entity_1")));
    if (path.startsWith("/v1/graph/ego")) return Promise.resolve(respond(200, fixture("ego_1_2")));
    if (path === "/v1/graph/quotes") return Promise.resolve(respond(200, fixture("quote_graph")));
    if (path === "/v1/export/map.geojson") return Promise.resolve(respond(200, fixture("map_geojson")));
    if (path === "/v1/channels/evaluate" && body) {
      const wanted = JSON.stringify(sortKeys(body.expr));
      const hit = evaluations.find((e) => JSON.stringify(sortKeys(e.expr)) === wanted);
      if (hit) return Promise.resolve(respond(200, hit));
      return Promise.resolve(respond(404, { detail: "no recorded evaluation for this expr" }));
    }
    return Promise.resolve(respond(404, { detail: `unrouted ${url}` }));
  };
  return { fetch: fetchImpl, requests };
}

function sortKeys(value: unknown): unknown {
  if (Array.isArray(value)) return value.map(sortKeys);
  if (value && typeof value === "object") {
    return Object.fromEntries(
      Object.entries(value as Record<string, unknown>)
        .sort(([a], [b]) => (a < b ? -1 : 1))
        .map(([k, v]) => [k, sortKeys(v)]),
    );
  }
  return value;
}

export function fakeStorage(): StorageLike {
  const store = new Map<string, string>();
  return {
    getItem: (key) => store.get(key) ?? null,
    setItem: (key, value) => void store.set(key, value),
  };
}

export function fakeRoot(): { innerHTML: string } {
  return { innerHTML: "" };
}
