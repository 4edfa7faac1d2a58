// Live top-stories timeline: up to ten lines at 10-minute buckets.
// Hovering a point shows the cluster's medoid headline; clicking a line
// routes to the cluster detail with its member articles.

import { attr, esc } from "../render.js";
import type { ClusterRow, TopStoriesPayload } from "../types.js";

export interface TimelineSeries {
  clusterId: string;
  title: string;
  points: { bucket: string; count: number }[];
}

export interface TimelineModel {
  series: TimelineSeries[];
  buckets: string[];
  maxCount: number;
}

export function timelineModel(payload: TopStoriesPayload): TimelineModel {
  const series = payload.items.slice(0, 10).map((row: ClusterRow) => ({
    clusterId: row.id,
    title: row.medoid_title,
    points: (row.size_history ?? []).map(([bucket, count]) => ({ bucket, count })),
  }));
  const buckets = Array.from(
    new Set(series.flatMap((s) => s.points.map((p) => p.bucket))),
  ).sort();
  const maxCount = Math.max(1, ...series.flatMap((s) => s.points.map((p) => p.count)));
  return { series, buckets, maxCount };
}

export function hoverTitle(model: TimelineModel, clusterId: string, bucket: string): string | null {
  const line = model.series.find((s) => s.clusterId === clusterId);
  if (!line || !line.points.some((p) => p.bucket === bucket)) return null;
  return line.title;
}

export function bucketCounts(model: TimelineModel, clusterId: string): Map<string, number> {
  const line = model.series.find((s) => s.clusterId === clusterId);
  const counts = new Map<string, number>();
  for (const point of line?.points ?? []) counts.set(point.bucket, point.count);
  return counts;
}

const WIDTH = 640;
const HEIGHT = 200;

export function renderTimeline(model: TimelineModel): string {
  if (model.series.length === 0) {
    return `<p class="empty">No live clusters yet.</p>`;
  }
  const x = (bucket: string) =>
    model.buckets.length <= 1 ? 0 : (model.buckets.indexOf(bucket) / (model.buckets.length - 1)) * WIDTH;
  const y = (count: number) => HEIGHT - (count / model.maxCount) * (HEIGHT - 10);
  const lines = model.series
    .map((line, index) => {
      const path = line.points.map((p) => `${x(p.bucket).toFixed(1)},${y(p.count).toFixed(1)}`).join(" ");
      const dots = line.points
        .map(
          (p) =>
            `<circle class="bucket-dot" r="3" cx="${x(p.bucket).toFixed(1)}" cy="${y(p.count).toFixed(1)}"` +
            ` data-action="hover-bucket" data-cluster=${attr(line.clusterId)} data-bucket=${attr(p.bucket)}` +
            ` data-count="${p.count}"><title>${esc(line.title)}</title></circle>`,
        )
        .join("");
      return (
        `<g class="series series-${index}" data-action="open-cluster" data-cluster=${attr(line.clusterId)}>` +
        `<polyline fill="none" points="${path}"></polyline>${dots}</g>`
      );
    })
    .join("\n");
  const legend = model.series
    .map(
      (line, index) =>
        `<li class="legend-${index}" data-action="open-cluster" data-cluster=${attr(line.clusterId)}>` +
        `${esc(line.title)} (${line.points.at(-1)?.count ?? 0})</li>`,
    )
    .join("");
  return (
    `<figure class="timeline"><svg viewBox="0 0 ${WIDTH} ${HEIGHT + 10}" role="img">${lines}</svg>` +
    `<ol class="legend">${legend}</ol></figure>`
  );
}
