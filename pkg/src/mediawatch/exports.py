"""Map exports: cluster placemarks as KML and GeoJSON.

Only clusters with at least two member articles are exported. A cluster's
placemark sits at its most frequently mentioned toponym and is titled with
the medoid headline. Both writers have matching validators so emitted
documents can be checked round-trip.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from xml.sax.saxutils import escape

import jsonschema

from .store import ArticleStore

KML_NS = "http://www.opengis.net/kml/2.2"
MIN_MAP_MEMBERS = 2


@dataclass(frozen=True)
class Placemark:
    cluster_id: str
    language: str
    title: str
    latitude: float
    longitude: float
    member_count: int


def map_placemarks(store: ArticleStore) -> list[Placemark]:
    """Placemarks for every live window cluster with >= 2 members and at
    least one located toponym among its articles. Daily clusters are the
    story substrate and stay off the map (they would double-place the same
    articles)."""
    placemarks = []
    for cluster_id in sorted(store.clusters):
        cluster = store.clusters[cluster_id]
        member_ids = cluster.get("member_ids", [])
        if cluster.get("kind") != "window":
            continue
        if len(member_ids) < MIN_MAP_MEMBERS:
            continue
        counts: dict[tuple[str, str], tuple[int, float, float]] = {}
        for member in member_ids:
            record = store.get(member)
            if record is None:
                continue
            for ref in record.toponym_refs:
                key = (ref.name, ref.country)
                count, _, _ = counts.get(key, (0, 0.0, 0.0))
                counts[key] = (count + 1, ref.latitude, ref.longitude)
        if not counts:
            continue
        (name, country), (count, lat, lon) = min(
            counts.items(), key=lambda item: (-item[1][0], item[0])
        )
        placemarks.append(
            Placemark(
                cluster_id=cluster_id,
                language=cluster.get("language", "und"),
                title=cluster.get("medoid_title", cluster_id),
                latitude=lat,
                longitude=lon,
                member_count=len(member_ids),
            )
        )
    return placemarks


def to_kml(placemarks: list[Placemark]) -> str:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<kml xmlns="{KML_NS}">',
        "<Document>",
    ]
    for mark in placemarks:
        lines += [
            "<Placemark>",
            f"<name>{escape(mark.title)}</name>",
            "<description>"
            + escape(f"{mark.member_count} articles ({mark.language}) in cluster {mark.cluster_id}")
            + "</description>",
            "<ExtendedData>"
            + f'<Data name="member_count"><value>{mark.member_count}</value></Data>'
            + f'<Data name="cluster_id"><value>{escape(mark.cluster_id)}</value></Data>'
            + "</ExtendedData>",
            f"<Point><coordinates>{mark.longitude},{mark.latitude},0</coordinates></Point>",
            "</Placemark>",
        ]
    lines += ["</Document>", "</kml>"]
    return "\n".join(lines)


def to_geojson(placemarks: list[Placemark]) -> dict:
    return {
        "type": "FeatureCollection",
        "features": [
            {
                "type": "Feature",
                "geometry": {
                    "type": "Point",
                    "coordinates": [mark.longitude, mark.latitude],
                },
                "properties": {
                    "cluster_id": mark.cluster_id,
                    "title": mark.title,
                    "language": mark.language,
                    "member_count": mark.member_count,
                },
            }
            for mark in placemarks
        ],
    }


GEOJSON_SCHEMA = {
    "type": "object",
    "required": ["type", "features"],
    "properties": {
        "type": {"const": "FeatureCollection"},
        "features": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["type", "geometry", "properties"],
                "properties": {
                    "type": {"const": "Feature"},
                    "geometry": {
                        "type": "object",
                        "required": ["type", "coordinates"],
                        "properties": {
                            "type": {"const": "Point"},
                            "coordinates": {
                                "type": "array",
                                "minItems": 2,
                                "maxItems": 2,
                                "prefixItems": [
                                    {"type": "number", "minimum": -180, "maximum": 180},
                                    {"type": "number", "minimum": -90, "maximum": 90},
                                ],
                            },
                        },
                    },
                    "properties": {
                        "type": "object",
                        "required": ["cluster_id", "title", "member_count"],
                        "properties": {"member_count": {"type": "integer", "minimum": 2}},
                    },
                },
            },
        },
    },
}


def validate_geojson(obj: dict) -> None:
    jsonschema.validate(obj, GEOJSON_SCHEMA)


def validate_kml(text: str) -> int:
    """Parse and structurally check a KML document; returns the placemark
    count so callers can assert against expectations."""
    root = ET.fromstring(text)
    if root.tag != f"{{{KML_NS}}}kml":
        raise ValueError(f"not a KML root element: {root.tag}")
    document = root.find(f"{{{KML_NS}}}Document")
    if document is None:
        raise ValueError("KML missing Document element")
    count = 0
    for placemark in document.findall(f"{{{KML_NS}}}Placemark"):
        name = placemark.find(f"{{{KML_NS}}}name")
        point = placemark.find(f"{{{KML_NS}}}Point/{{{KML_NS}}}coordinates")
        if name is None or not (name.text or "").strip():
            raise ValueError("Placemark missing name")
        if point is None or not (point.text or "").strip():
            raise ValueError("Placemark missing Point coordinates")
        parts = point.text.strip().split(",")
        lon, lat = float(parts[0]), float(parts[1])
        if abs(lon) > 180 or abs(lat) > 90:
            raise ValueError(f"coordinates out of range: {point.text}")
        count += 1
    return count
