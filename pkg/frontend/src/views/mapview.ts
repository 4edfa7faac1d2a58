// Cluster map: placemarks from the GeoJSON export (the API only emits
// clusters with at least two member articles) on an equirectangular
// plane, merged client-side into coarse grid cells at low zoom.

import { attr, esc } from "../render.js";
import type { GeoFeature, GeoJsonPayload } from "../types.js";

const WIDTH = 720;
const HEIGHT = 360;

export interface MapMarker {
  x: number;
  y: number;
  titles: string[];
  clusterIds: string[];
  articleCount: number;
}

export function project(lon: number, lat: number): { x: number; y: number } {
  return {
    x: ((lon + 180) / 360) * WIDTH,
    y: ((90 - lat) / 180) * HEIGHT,
  };
}

export function mergeMarkers(payload: GeoJsonPayload, gridCells = 24): MapMarker[] {
  const buckets = new Map<string, GeoFeature[]>();
  for (const feature of payload.features) {
    const [lon, lat] = feature.geometry.coordinates;
    const key = `${Math.floor(((lon + 180) / 360) * gridCells)}:${Math.floor(((90 - lat) / 180) * gridCells)}`;
    const group = buckets.get(key) ?? [];
    group.push(feature);
    buckets.set(key, group);
  }
  const markers: MapMarker[] = [];
  for (const group of buckets.values()) {
    const lons = group.map((f) => f.geometry.coordinates[0]);
    const lats = group.map((f) => f.geometry.coordinates[1]);
    const { x, y } = project(
      lons.reduce((a, b) => a + b, 0) / group.length,
      lats.reduce((a, b) => a + b, 0) / group.length,
    );
    markers.push({
      x,
      y,
      titles: group.map((f) => f.properties.title),
      clusterIds: group.map((f) => f.properties.cluster_id),
      articleCount: group.reduce((sum, f) => sum + f.properties.member_count, 0),
    });
  }
  return markers.sort((a, b) => a.x - b.x || a.y - b.y);
}

export function renderMap(payload: GeoJsonPayload, gridCells = 24): string {
  const markers = mergeMarkers(payload, gridCells);
  if (markers.length === 0) {
    return `<p class="empty">No locatable clusters right now.</p>`;
  }
  const dots = markers
    .map((marker) => {
      const first = marker.clusterIds[0];
      return (
        `<g class="marker" data-action="open-cluster" data-cluster=${attr(first)}` +
        ` transform="translate(${marker.x.toFixed(1)},${marker.y.toFixed(1)})">` +
        `<circle r="${Math.min(14, 4 + marker.articleCount)}"></circle>` +
        `<title>${esc(marker.titles.join(" | "))}</title>` +
        `<text dy="4">${marker.articleCount}</text></g>`
      );
    })
    .join("");
  return `<figure class="cluster-map"><svg viewBox="0 0 ${WIDTH} ${HEIGHT}">${dots}</svg></figure>`;
}
