// Channel expression building, validation, and pinned channel sets.
//
// Sets persist as the same JSON documents the engine understands, keyed by
// profile name. Storage is injected (localStorage in the browser, a map in
// tests); notification logic stays fully client-side, so no write API is
// needed.

import type { ChannelExpr, LeafKind } from "./types.js";

export const LEAF_KINDS: LeafKind[] = [
  "category",
  "top_stories",
  "country_source",
  "country_about",
  "entity",
  "language",
  "search",
];

export const MAX_DEPTH = 8;

export function leaf(kind: LeafKind, value: string | number): ChannelExpr {
  return { kind, value };
}

export function union(...children: ChannelExpr[]): ChannelExpr {
  return { kind: "union", children };
}

export function intersection(...children: ChannelExpr[]): ChannelExpr {
  return { kind: "intersection", children };
}

export interface FieldError {
  field: string;
  message: string;
}

export function validateExpr(expr: ChannelExpr, depth = 1, path = "expr"): FieldError[] {
  if (depth > MAX_DEPTH) {
    return [{ field: path, message: `nesting deeper than ${MAX_DEPTH}` }];
  }
  if (expr.kind === "union" || expr.kind === "intersection") {
    if (!("children" in expr) || expr.children.length === 0) {
      return [{ field: path, message: `${expr.kind} needs at least one child` }];
    }
    return expr.children.flatMap((child, i) => validateExpr(child, depth + 1, `${path}.${i}`));
  }
  if (!LEAF_KINDS.includes(expr.kind)) {
    return [{ field: path, message: `unknown kind ${String(expr.kind)}` }];
  }
  const value = (expr as { value?: unknown }).value;
  if (expr.kind === "entity") {
    if (typeof value !== "number" || !Number.isInteger(value)) {
      return [{ field: path, message: "entity needs an integer id" }];
    }
    return [];
  }
  if (typeof value !== "string" || value.length === 0) {
    return [{ field: path, message: `${expr.kind} needs a non-empty value` }];
  }
  return [];
}

export interface Channel {
  name: string;
  expr: ChannelExpr;
}

export interface ChannelSet {
  name: string;
  channels: Channel[];
}

export function addChannel(set: ChannelSet, name: string, expr: ChannelExpr): ChannelSet {
  if (set.channels.some((c) => c.name === name)) {
    throw new Error(`channel name "${name}" already in set "${set.name}"`);
  }
  const errors = validateExpr(expr);
  if (errors.length > 0) {
    throw new Error(errors.map((e) => `${e.field}: ${e.message}`).join("; "));
  }
  return { name: set.name, channels: [...set.channels, { name, expr }] };
}

// A facet chip in any result view can be pinned as a new channel.
export function facetToLeaf(facetKind: string, bucket: string | number): ChannelExpr {
  switch (facetKind) {
    case "categories":
      return leaf("category", String(bucket));
    case "entities":
      return leaf("entity", Number(bucket));
    case "source_countries":
      return leaf("country_source", String(bucket));
    case "about_countries":
      return leaf("country_about", String(bucket));
    default:
      throw new Error(`facet ${facetKind} cannot be pinned`);
  }
}

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

const STORAGE_PREFIX = "mediawatch.channels.";

export function saveChannelSets(storage: StorageLike, profile: string, sets: ChannelSet[]): void {
  storage.setItem(STORAGE_PREFIX + profile, JSON.stringify(sets));
}

export function loadChannelSets(storage: StorageLike, profile: string): ChannelSet[] {
  const raw = storage.getItem(STORAGE_PREFIX + profile);
  if (!raw) return [];
  const parsed = JSON.parse(raw) as ChannelSet[];
  for (const set of parsed) {
    for (const channel of set.channels) {
      const errors = validateExpr(channel.expr);
      if (errors.length > 0) {
        throw new Error(`stored channel ${channel.name} invalid: ${errors[0].message}`);
      }
    }
  }
  return parsed;
}
