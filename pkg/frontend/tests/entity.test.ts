import { describe, expect, it } from "vitest";

import { egoLayout, renderEgoGraph, renderEntityPage } from "../src/views/entity.js";
import { mergeMarkers, renderMap } from "../src/views/mapview.js";
import { renderArticleList } from "../src/render.js";
import type { EntityPagePayload, EvaluatePayload, GeoJsonPayload, GraphPayload } from "../src/types.js";
import { fixture } from "./helpers.js";

const page = fixture<EntityPagePayload>("entity_1");
const ego = fixture<GraphPayload>("ego_1_2");

describe("entity page", () => {
  it("shows variants, titles, related and associated lists", () => {
    const html = renderEntityPage(page);
    for (const [surface] of page.variants) {
      expect(html).toContain(surface);
    }
    for (const title of page.titles) {
      expect(html).toContain(title);
    }
    for (const row of page.related) {
      expect(html).toContain(`data-action="open-entity" data-id="${row.id}"`);
    }
    expect(html).toContain('class="panel associated"');
  });

  it("renders quotes by and about the entity", () => {
    const html = renderEntityPage(page);
    for (const quote of page.quotes_by) {
      expect(html).toContain(quote.text);
    }
  });

  it("shows an empty state when there are no quotes", () => {
    const html = renderEntityPage({ ...page, quotes_by: [], quotes_about: [] });
    expect(html).toContain("No quotes recorded");
  });
});

describe("ego graph", () => {
  it("renders exactly the API's node set", () => {
    const html = renderEgoGraph(ego);
    for (const node of ego.nodes) {
      expect(html).toContain(`data-action="open-entity" data-id="${node.id}"`);
    }
    const rendered = (html.match(/data-id="(\d+)"/g) ?? []).map((m) => Number(m.slice(9, -1)));
    expect(rendered.sort((a, b) => a - b)).toEqual(ego.nodes.map((n) => n.id).sort((a, b) => a - b));
  });

  it("styles common neighbors distinctly", () => {
    expect(ego.nodes.some((n) => n.common)).toBe(true);
    const html = renderEgoGraph(ego);
    for (const node of ego.nodes) {
      if (node.common) {
        expect(html).toMatch(new RegExp(`class="node common[^"]*"[^>]*data-id="${node.id}"`));
      }
    }
  });

  it("keeps the layout deterministic for the same data", () => {
    expect(egoLayout(ego)).toEqual(egoLayout(ego));
  });
});

describe("map view", () => {
  it("renders only what the API exports (clusters with >= 2 members)", () => {
    const geo = fixture<GeoJsonPayload>("map_geojson");
    for (const feature of geo.features) {
      expect(feature.properties.member_count).toBeGreaterThanOrEqual(2);
    }
    const html = renderMap(geo);
    const total = geo.features.reduce((sum, f) => sum + f.properties.member_count, 0);
    const counts = Array.from(html.matchAll(/<text dy="4">(\d+)<\/text>/g)).map((m) => Number(m[1]));
    expect(counts.reduce((a, b) => a + b, 0)).toBe(total);
  });

  it("merges nearby placemarks into one marker at low zoom", () => {
    const geo = fixture<GeoJsonPayload>("map_geojson");
    const merged = mergeMarkers(geo, 4); // very coarse grid
    expect(merged.length).toBeLessThanOrEqual(geo.features.length);
    const articles = merged.reduce((sum, m) => sum + m.articleCount, 0);
    expect(articles).toBe(geo.features.reduce((sum, f) => sum + f.properties.member_count, 0));
  });
});

describe("article rendering", () => {
  it("shows title and snippet only, never more body text", () => {
    const evaluation = fixture<EvaluatePayload>("evaluate_alert_cell");
    const html = renderArticleList(evaluation.articles);
    for (const article of evaluation.articles) {
      expect(html).toContain(article.title);
      expect(html).toContain(article.snippet.slice(0, 60));
      expect(article.snippet.split(/\s+/).length).toBeLessThanOrEqual(40);
    }
    expect(html).not.toContain("undefined");
  });
});
