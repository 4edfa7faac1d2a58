// Entity page (name variants, titles, related vs associated lists, latest
// clusters, quotes) and the ego network. Layout is a plain deterministic
// circle; the data (nodes, links, common flags) comes straight from the
// API and clicking any node opens that entity's page.

import { attr, esc } from "../render.js";
import type { EntityPagePayload, GraphPayload } from "../types.js";

export function renderEntityPage(page: EntityPagePayload): string {
  const variants = page.variants
    .map(([surface, hint]) => `<li>${esc(surface)}${hint ? ` <span class="hint">(${esc(hint)})</span>` : ""}</li>`)
    .join("");
  const titles = page.titles.map((t) => `<li>${esc(t)}</li>`).join("");
  const related = page.related
    .map(
      (row) =>
        `<li data-action="open-entity" data-id="${row.id}">${esc(row.label)} <b>${row.count}</b></li>`,
    )
    .join("");
  const associated = page.associated
    .map(
      (row) =>
        `<li data-action="open-entity" data-id="${row.id}">${esc(row.label)} <b>${row.score.toFixed(2)}</b></li>`,
    )
    .join("");
  const clusters = page.latest_clusters
    .map(
      (row) =>
        `<li data-action="open-cluster" data-cluster=${attr(row.id)}>${esc(row.medoid_title)} (${row.member_ids.length})</li>`,
    )
    .join("");
  const quotesBy = page.quotes_by.length
    ? page.quotes_by.map((q) => `<blockquote>“${esc(q.text)}”</blockquote>`).join("")
    : `<p class="empty">No quotes recorded from this entity.</p>`;
  const quotesAbout = page.quotes_about.length
    ? page.quotes_about.map((q) => `<blockquote>“${esc(q.text)}”</blockquote>`).join("")
    : `<p class="empty">No quotes mention this entity.</p>`;
  return `<article class="entity-page" data-entity="${page.id}">
  <h2>${esc(page.canonical_name)} <span class="kind">${esc(page.kind)}</span></h2>
  <section class="panel variants"><h3>Names</h3><ul>${variants}</ul></section>
  <section class="panel titles"><h3>Titles</h3><ul>${titles}</ul></section>
  <section class="panel related"><h3>Related</h3><ol>${related}</ol></section>
  <section class="panel associated"><h3>Associated</h3><ol>${associated}</ol></section>
  <section class="panel clusters"><h3>Latest clusters</h3><ul>${clusters}</ul></section>
  <section class="panel quotes-by"><h3>Quotes</h3>${quotesBy}</section>
  <section class="panel quotes-about"><h3>Mentioned in quotes</h3>${quotesAbout}</section>
  <button data-action="drill-down-entity" data-id="${page.id}">Show articles</button>
</article>`;
}

const SIZE = 420;

export interface EgoLayoutNode {
  id: number;
  label: string;
  common: boolean;
  seed: boolean;
  x: number;
  y: number;
}

export function egoLayout(graph: GraphPayload): EgoLayoutNode[] {
  const ordered = [...graph.nodes].sort((a, b) => a.id - b.id);
  const radius = SIZE / 2 - 30;
  return ordered.map((node, index) => {
    const angle = (2 * Math.PI * index) / Math.max(1, ordered.length);
    return {
      id: node.id,
      label: node.label,
      common: node.common,
      seed: Boolean(node.seed),
      x: SIZE / 2 + radius * Math.cos(angle) * (node.seed ? 0.35 : 1),
      y: SIZE / 2 + radius * Math.sin(angle) * (node.seed ? 0.35 : 1),
    };
  });
}

export function renderEgoGraph(graph: GraphPayload): string {
  if (graph.nodes.length === 0) {
    return `<p class="empty">No co-occurrence data for these entities.</p>`;
  }
  const nodes = egoLayout(graph);
  const position = new Map(nodes.map((n) => [n.id, n]));
  const links = graph.links
    .map((link) => {
      const a = position.get(link.source);
      const b = position.get(link.target);
      if (!a || !b) return "";
      return `<line x1="${a.x.toFixed(1)}" y1="${a.y.toFixed(1)}" x2="${b.x.toFixed(1)}" y2="${b.y.toFixed(1)}" stroke-width="${Math.min(6, link.weight)}"></line>`;
    })
    .join("");
  const circles = nodes
    .map(
      (node) =>
        `<g class="node${node.common ? " common" : ""}${node.seed ? " seed" : ""}"` +
        ` data-action="open-entity" data-id="${node.id}" transform="translate(${node.x.toFixed(1)},${node.y.toFixed(1)})">` +
        `<circle r="${node.seed ? 10 : 6}"></circle><text dy="-12">${esc(node.label)}</text></g>`,
    )
    .join("");
  const skipped = graph.skipped_seeds?.length
    ? `<p class="notice">Unknown seeds skipped: ${graph.skipped_seeds.join(", ")}</p>`
    : "";
  return `<figure class="ego-graph"><svg viewBox="0 0 ${SIZE} ${SIZE}">${links}${circles}</svg>${skipped}</figure>`;
}
