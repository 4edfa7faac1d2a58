// Channel builder: compose channel expressions from the seven leaf kinds
// plus union/intersection, pin facet chips from any result view as new
// channels, and manage named sets.

import { LEAF_KINDS, type ChannelSet, validateExpr } from "../channels.js";
import { attr, esc } from "../render.js";
import type { ChannelExpr, EvaluatePayload } from "../types.js";

export interface BuilderDraft {
  combinator: "union" | "intersection";
  leaves: { kind: string; value: string }[];
}

export function draftToExpr(draft: BuilderDraft): { expr?: ChannelExpr; errors: { field: string; message: string }[] } {
  const errors: { field: string; message: string }[] = [];
  const leaves: ChannelExpr[] = [];
  draft.leaves.forEach((row, index) => {
    if (!LEAF_KINDS.includes(row.kind as never)) {
      errors.push({ field: `leaves.${index}.kind`, message: `unknown kind ${row.kind}` });
      return;
    }
    if (row.kind === "entity") {
      const id = Number(row.value);
      if (!Number.isInteger(id) || row.value.trim() === "") {
        errors.push({ field: `leaves.${index}.value`, message: "entity needs an integer id" });
        return;
      }
      leaves.push({ kind: "entity", value: id });
      return;
    }
    if (row.value.trim() === "") {
      errors.push({ field: `leaves.${index}.value`, message: `${row.kind} needs a value` });
      return;
    }
    leaves.push({ kind: row.kind as never, value: row.value.trim() });
  });
  if (leaves.length === 0 && errors.length === 0) {
    errors.push({ field: "leaves", message: "add at least one condition" });
  }
  if (errors.length > 0) {
    return { errors };
  }
  const expr = leaves.length === 1 ? leaves[0] : { kind: draft.combinator, children: leaves };
  const exprErrors = validateExpr(expr);
  return exprErrors.length > 0 ? { errors: exprErrors } : { expr, errors: [] };
}

export function renderBuilder(draft: BuilderDraft, errors: { field: string; message: string }[]): string {
  const errorFor = (field: string) => {
    const hit = errors.find((e) => e.field === field);
    return hit ? `<span class="field-error">${esc(hit.message)}</span>` : "";
  };
  const kindOptions = (selected: string) =>
    LEAF_KINDS.map((k) => `<option value="${k}"${k === selected ? " selected" : ""}>${k}</option>`).join("");
  const rows = draft.leaves
    .map(
      (row, index) => `<div class="leaf-row" data-index="${index}">
  <select data-field="kind">${kindOptions(row.kind)}</select>
  <input data-field="value" value=${attr(row.value)} /> ${errorFor(`leaves.${index}.kind`)}${errorFor(`leaves.${index}.value`)}
  <button data-action="remove-leaf" data-index="${index}">×</button>
</div>`,
    )
    .join("\n");
  return `<form class="channel-builder">
  <label>combine as
    <select data-field="combinator">
      <option value="intersection"${draft.combinator === "intersection" ? " selected" : ""}>intersection</option>
      <option value="union"${draft.combinator === "union" ? " selected" : ""}>union</option>
    </select>
  </label>
  ${rows}
  ${errorFor("leaves")}
  <button data-action="add-leaf">Add condition</button>
  <button data-action="evaluate-draft">Preview</button>
  <button data-action="pin-draft">Pin as channel</button>
</form>`;
}

export function renderChannelSet(set: ChannelSet | null, selected: string | null): string {
  if (!set || set.channels.length === 0) {
    return `<p class="empty">No pinned channels yet.</p>`;
  }
  const rows = set.channels
    .map(
      (channel) =>
        `<li class="${channel.name === selected ? "selected" : ""}" data-action="open-channel" data-name=${attr(channel.name)}>${esc(channel.name)}</li>`,
    )
    .join("");
  return `<nav class="channel-set"><h3>${esc(set.name)}</h3><ol>${rows}</ol></nav>`;
}

// Facet chips under a channel result: each one can be pinned as a channel.
export function renderFacets(payload: EvaluatePayload): string {
  const block = (kind: string, title: string, rows: { bucket: string | number; count: number }[]) => {
    if (rows.length === 0) return "";
    const chips = rows
      .map(
        (row) =>
          `<button class="chip" data-action="pin-facet" data-facet=${attr(kind)} data-bucket=${attr(row.bucket)}>${esc(row.bucket)} (${row.count})</button>`,
      )
      .join("");
    return `<div class="facet-block" data-facet-kind=${attr(kind)}><h4>${esc(title)}</h4>${chips}</div>`;
  };
  return `<section class="facets">
${block("categories", "Categories", payload.facets.categories)}
${block("entities", "Entities", payload.facets.entities)}
${block("source_countries", "Published in", payload.facets.source_countries)}
${block("about_countries", "About", payload.facets.about_countries)}
</section>`;
}
