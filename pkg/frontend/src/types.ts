// Payload shapes of the /v1 API the dashboard consumes.

export type LeafKind =
  | "category"
  | "top_stories"
  | "country_source"
  | "country_about"
  | "entity"
  | "language"
  | "search";

export type ChannelExpr =
  | { kind: LeafKind; value: string | number }
  | { kind: "union" | "intersection"; children: ChannelExpr[] };

export interface ArticleRecord {
  id: string;
  source_id: string;
  url: string;
  title: string;
  snippet: string;
  language: string;
  country_of_source: string;
  published_at: string;
  categories: string[];
  entity_ids: number[];
  tonality: number;
  cluster_id: string | null;
}

export interface SizeHistoryPoint {
  bucket: string;
  count: number;
}

export interface ClusterRow {
  id: string;
  kind: "window" | "daily";
  language: string;
  member_ids: string[];
  medoid_id: string;
  medoid_title: string;
  window_start?: string;
  window_end?: string;
  size_history?: [string, number][];
  articles_url?: string;
}

export interface TopStoriesPayload {
  language: string;
  items: ClusterRow[];
}

export interface ClusterDetailPayload extends ClusterRow {
  articles: ArticleRecord[];
}

export interface AlertCell {
  country: string;
  category: string;
  observed: number;
  baseline_daily: number;
  dow_factor: number;
  expected: number;
  score: number;
  level: "high" | "medium" | "low";
  drill_down: ChannelExpr;
}

export interface AlertsPayload {
  clock: string;
  cells: AlertCell[];
}

export interface SeriesPayload {
  country: string | null;
  category: string | null;
  resolution: "day" | "month";
  metric: "count" | "tonality";
  points: { bucket: string; value: number }[];
}

export interface FacetRow {
  bucket: string | number;
  count: number;
  share: number;
}

export interface EvaluatePayload {
  expr: ChannelExpr;
  total: number;
  ids: string[];
  articles: ArticleRecord[];
  facets: {
    article_count: number;
    categories: FacetRow[];
    entities: FacetRow[];
    source_countries: FacetRow[];
    about_countries: FacetRow[];
  };
}

export interface EntityPagePayload {
  id: number;
  canonical_name: string;
  kind: string;
  variants: [string, string][];
  titles: string[];
  related: { id: number; count: number; label: string }[];
  associated: { id: number; score: number; label: string }[];
  latest_clusters: ClusterRow[];
  quotes_by: { article_id: string; text: string; mentions: number[] }[];
  quotes_about: { article_id: string; text: string; speaker: number | null }[];
  drill_down: ChannelExpr;
}

export interface GraphNode {
  id: number;
  label: string;
  common: boolean;
  rank: number;
  seed?: boolean;
  in_degree?: number;
}

export interface GraphLink {
  source: number;
  target: number;
  weight: number;
}

export interface GraphPayload {
  nodes: GraphNode[];
  links: GraphLink[];
  skipped_seeds?: number[];
}

export interface GeoFeature {
  type: "Feature";
  geometry: { type: "Point"; coordinates: [number, number] };
  properties: { cluster_id: string; title: string; language: string; member_count: number };
}

export interface GeoJsonPayload {
  type: "FeatureCollection";
  features: GeoFeature[];
}
