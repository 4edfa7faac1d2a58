"""Read-only HTTP API over a store snapshot.

Everything is served under /v1 and answers are plain JSON built from the
same query functions the CLI uses, so both interfaces give identical
results on the same snapshot. Every aggregate response embeds a
drill-down: either a channel expression whose evaluation returns the
underlying articles, or a direct articles URL.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, time, timedelta, timezone

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse, Response

from .alerting import alert_board, series
from .channels import ChannelExpr, channel_metadata, evaluate
from .errors import IncompleteHistory, MalformedExpr
from .exports import map_placemarks, to_geojson, to_kml, validate_geojson, validate_kml
from .graphs import (
    CooccurrenceIndex,
    associated_entities,
    build_cooccurrence,
    distribution_comparison,
    distribution_report,
    ego_graph,
    quote_graph,
    related_entities,
)
from .errors import UnknownEntity
from .linguistic import Entity, load_entities
from .store import ArticleRecord, ArticleStore
from .textutil import parse_rfc3339, rfc3339

DEFAULT_PAGE = 50


@dataclass
class AppState:
    store: ArticleStore
    entities_by_id: dict[int, Entity] = field(default_factory=dict)
    source_kinds: dict[str, str] = field(default_factory=dict)
    alert_floor: float = 0.5
    alert_high: float = 4.0
    alert_medium: float = 2.0
    alert_min_support: int = 2
    top_n: int = 10
    cooccurrence: CooccurrenceIndex = field(default_factory=CooccurrenceIndex)

    @classmethod
    def load(cls, store_dir, entities_path=None, config=None) -> "AppState":
        from .ingest import load_sources

        store = ArticleStore(store_dir)
        entities = load_entities(entities_path) if entities_path else []
        state = cls(store=store, entities_by_id={e.id: e for e in entities})
        if config is not None:
            state.alert_floor = config.alert_floor
            state.alert_high = config.alert_high
            state.alert_medium = config.alert_medium
            state.alert_min_support = config.alert_min_support
            state.top_n = config.top_n
            if config.entities_path and not entities:
                loaded = load_entities(config.entities_path)
                state.entities_by_id = {e.id: e for e in loaded}
            if config.sources_path:
                state.source_kinds = {s.id: s.kind for s in load_sources(config.sources_path).values()}
        state.cooccurrence = build_cooccurrence(
            [set(map(int, row.get("entities", {}))) for row in store.clusters.values() if row.get("kind") == "daily"]
        )
        return state


def default_clock(store: ArticleStore) -> datetime:
    """Midnight (UTC) after the newest stored article: the last fully
    observable day ends there, and CLI and API agree on it by construction."""
    if not store.records:
        return datetime.now(timezone.utc)
    latest = max(r.published_at for r in store.records.values())
    return datetime.combine(latest.date() + timedelta(days=1), time(0, 0), tzinfo=timezone.utc)


def record_json(record: ArticleRecord) -> dict:
    return record.to_json()


def cell_drilldown(country: str, category: str) -> dict:
    children = [{"kind": "country_source", "value": country}]
    if category:
        children.append({"kind": "category", "value": category})
    return {"kind": "intersection", "children": children}


def alerts_payload(state: AppState, clock: datetime) -> dict:
    cells = alert_board(
        state.store,
        clock,
        floor=state.alert_floor,
        min_support=state.alert_min_support,
        high=state.alert_high,
        medium=state.alert_medium,
    )
    return {
        "clock": rfc3339(clock),
        "cells": [
            {**cell.to_json(), "drill_down": cell_drilldown(cell.country, cell.category_id)}
            for cell in cells
        ],
    }


def top_stories_payload(state: AppState, language: str, n: int) -> dict:
    rows = [
        row
        for row in state.store.clusters.values()
        if row.get("kind") == "window" and row.get("language") == language
    ]
    rows.sort(key=lambda r: (-len(r["member_ids"]), r.get("window_start", ""), r["id"]))
    items = []
    for row in rows[:n]:
        items.append({**row, "articles_url": f"/v1/clusters/{row['id']}/articles"})
    return {"language": language, "items": items}


def entity_payload(state: AppState, entity_id: int) -> dict:
    entity = state.entities_by_id.get(entity_id)
    known_in_index = entity_id in state.cooccurrence.entity_counts
    if entity is None and not known_in_index:
        raise KeyError(entity_id)
    try:
        related = related_entities(entity_id, state.cooccurrence)
        associated = associated_entities(entity_id, state.cooccurrence)
    except UnknownEntity:
        related, associated = [], []

    def name_of(eid: int) -> str:
        known = state.entities_by_id.get(eid)
        return known.canonical_name if known else str(eid)

    clusters = [
        row
        for row in state.store.clusters.values()
        if str(entity_id) in row.get("entities", {})
    ]
    clusters.sort(key=lambda r: (r.get("day", r.get("window_end", "")), r["id"]), reverse=True)
    quotes_by = [q for q in state.store.quotes if q.speaker_entity == entity_id]
    quotes_about = [q for q in state.store.quotes if entity_id in q.mentioned_entities]
    return {
        "id": entity_id,
        "canonical_name": entity.canonical_name if entity else str(entity_id),
        "kind": entity.kind if entity else "person",
        "variants": sorted([v, h] for v, h in entity.variants) if entity else [],
        "titles": sorted(entity.titles) if entity else [],
        "related": [{"id": e, "count": c, "label": name_of(e)} for e, c in related],
        "associated": [{"id": e, "score": s, "label": name_of(e)} for e, s in associated],
        "latest_clusters": clusters[:10],
        "quotes_by": [
            {"article_id": q.article_id, "text": q.text, "mentions": sorted(q.mentioned_entities)}
            for q in quotes_by[:20]
        ],
        "quotes_about": [
            {"article_id": q.article_id, "text": q.text, "speaker": q.speaker_entity}
            for q in quotes_about[:20]
        ],
        "drill_down": {"kind": "entity", "value": entity_id},
    }


def create_app(state: AppState) -> FastAPI:
    app = FastAPI(title="mediawatch", version="1")

    def paginate(items: list, limit: int, offset: int) -> list:
        return items[offset : offset + limit]

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "articles": len(state.store.records)}

    @app.get("/v1/top-stories")
    def top_stories(lang: str = Query(...), n: int = Query(None)):
        return JSONResponse(top_stories_payload(state, lang, n or state.top_n))

    @app.get("/v1/clusters/{cluster_id}")
    def cluster_detail(cluster_id: str):
        row = state.store.clusters.get(cluster_id)
        if row is None:
            raise HTTPException(status_code=404, detail="unknown cluster")
        articles = [
            record_json(state.store.records[m])
            for m in row["member_ids"]
            if m in state.store.records
        ]
        articles.sort(key=lambda a: (a["published_at"], a["id"]), reverse=True)
        return JSONResponse({**row, "articles": articles, "articles_url": f"/v1/clusters/{cluster_id}/articles"})

    @app.get("/v1/clusters/{cluster_id}/articles")
    def cluster_articles(cluster_id: str, limit: int = DEFAULT_PAGE, offset: int = 0):
        row = state.store.clusters.get(cluster_id)
        if row is None:
            raise HTTPException(status_code=404, detail="unknown cluster")
        articles = [
            record_json(state.store.records[m])
            for m in row["member_ids"]
            if m in state.store.records
        ]
        articles.sort(key=lambda a: (a["published_at"], a["id"]), reverse=True)
        return JSONResponse({"cluster_id": cluster_id, "articles": paginate(articles, limit, offset)})

    @app.get("/v1/stories/{story_id}")
    def story_detail(story_id: str):
        row = state.store.stories.get(story_id)
        if row is None:
            raise HTTPException(status_code=404, detail="unknown story")
        days = {
            day: {**info, "articles_url": f"/v1/clusters/{info['cluster_id']}/articles"}
            for day, info in row.get("days", {}).items()
        }
        return JSONResponse({**row, "days": days})

    @app.get("/v1/alerts")
    def alerts(clock: str | None = None):
        moment = parse_rfc3339(clock) if clock else default_clock(state.store)
        try:
            return JSONResponse(alerts_payload(state, moment))
        except IncompleteHistory as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    @app.get("/v1/series")
    def series_endpoint(
        country: str | None = None,
        category: str | None = None,
        resolution: str = "day",
        start: str = Query(...),
        end: str = Query(...),
        metric: str = "count",
    ):
        points = series(
            state.store,
            country,
            category,
            resolution,
            (parse_rfc3339(start + "T00:00:00Z").date(), parse_rfc3339(end + "T00:00:00Z").date()),
            metric=metric,
        )
        return JSONResponse(
            {
                "country": country,
                "category": category,
                "resolution": resolution,
                "metric": metric,
                "points": [{"bucket": p.bucket.isoformat(), "value": p.value} for p in points],
                "drill_down": cell_drilldown(country, category) if country else None,
            }
        )

    @app.get("/v1/entities/{entity_id}")
    def entity_page(entity_id: int):
        try:
            return JSONResponse(entity_payload(state, entity_id))
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown entity")

    @app.get("/v1/graph/ego")
    def graph_ego(entity: list[int] = Query(...), n: int = 100):
        graph = ego_graph(entity, state.cooccurrence, n=n, entities_by_id=state.entities_by_id)
        return JSONResponse({**graph.to_json(), "skipped_seeds": graph.skipped_seeds})

    @app.get("/v1/graph/quotes")
    def graph_quotes():
        graph = quote_graph(state.store.quotes, entities_by_id=state.entities_by_id)
        return JSONResponse(graph.to_json())

    def evaluate_expr(obj: dict, limit: int, offset: int) -> dict:
        try:
            expr = ChannelExpr.from_json(obj)
        except MalformedExpr as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        ids = evaluate(expr, state.store)
        page = paginate(ids, limit, offset)
        return {
            "expr": expr.to_json(),
            "total": len(ids),
            "ids": page,
            "articles": [record_json(state.store.records[i]) for i in page],
            "facets": channel_metadata(expr, state.store, source_kinds=state.source_kinds),
        }

    @app.post("/v1/channels/evaluate")
    async def channels_evaluate_post(request: Request, limit: int = DEFAULT_PAGE, offset: int = 0):
        body = await request.json()
        obj = body.get("expr", body)
        return JSONResponse(evaluate_expr(obj, limit, offset))

    @app.get("/v1/channels/evaluate")
    def channels_evaluate_get(expr: str = Query(...), limit: int = DEFAULT_PAGE, offset: int = 0):
        try:
            obj = json.loads(expr)
        except json.JSONDecodeError as exc:
            raise HTTPException(status_code=400, detail=f"expr is not valid JSON: {exc.msg}")
        return JSONResponse(evaluate_expr(obj, limit, offset))

    @app.get("/v1/search")
    def search_endpoint(
        q: str = "",
        lang: str | None = None,
        country: str | None = None,
        category: str | None = None,
        entity: int | None = None,
        date_from: str | None = None,
        date_to: str | None = None,
        limit: int = DEFAULT_PAGE,
        offset: int = 0,
    ):
        ids = state.store.search(
            q,
            language=lang,
            country=country,
            category=category,
            entity_id=entity,
            date_from=parse_rfc3339(date_from) if date_from else None,
            date_to=parse_rfc3339(date_to) if date_to else None,
        )
        page = paginate(ids, limit, offset)
        return JSONResponse(
            {
                "total": len(ids),
                "ids": page,
                "articles": [record_json(state.store.records[i]) for i in page],
            }
        )

    @app.get("/v1/reports/distribution")
    def distribution(dimension: str, expr: str | None = None, compare: str | None = None):
        def records_for(raw: str | None):
            if raw is None:
                return list(state.store.records.values())
            try:
                channel = ChannelExpr.from_json(json.loads(raw))
            except (json.JSONDecodeError, MalformedExpr) as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            return [state.store.records[i] for i in evaluate(channel, state.store)]

        base = records_for(expr)
        if compare is not None:
            rows = distribution_comparison(base, records_for(compare), dimension, state.source_kinds)
        else:
            rows = distribution_report(base, dimension, state.source_kinds)
        return JSONResponse({"dimension": dimension, "rows": rows})

    @app.get("/v1/export/map.kml")
    def export_kml():
        text = to_kml(map_placemarks(state.store))
        validate_kml(text)
        return Response(content=text, media_type="application/vnd.google-earth.kml+xml")

    @app.get("/v1/export/map.geojson")
    def export_geojson():
        obj = to_geojson(map_placemarks(state.store))
        validate_geojson(obj)
        return JSONResponse(obj, media_type="application/geo+json")

    return app


def serve(state: AppState, host: str = "127.0.0.1", port: int = 8600) -> None:
    import uvicorn

    from .errors import PortBindError

    app = create_app(state)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except OSError as exc:
        raise PortBindError(f"cannot bind {host}:{port}: {exc}") from exc
