from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from mediawatch.ingest import RawArticle, Source
from mediawatch.store import ArticleRecord, make_snippet

UTC = timezone.utc
T0 = datetime(2015, 5, 4, 8, 0, 0, tzinfo=UTC)  # a Monday


def make_record(
    rec_id: str,
    published_at: datetime,
    country: str = "US",
    categories: tuple[str, ...] = (),
    language: str = "en",
    title: str = "Untitled report",
    body: str = "",
    tonality: float = 0.0,
    entity_ids: tuple[int, ...] = (),
    cluster_id: str | None = None,
    toponym_refs: tuple = (),
    source_id: str = "src-1",
) -> ArticleRecord:
    return ArticleRecord(
        id=rec_id,
        source_id=source_id,
        url=f"http://example.test/{rec_id}",
        title=title,
        snippet=make_snippet(body),
        language=language,
        country_of_source=country,
        published_at=published_at,
        categories=frozenset(categories),
        entity_ids=frozenset(entity_ids),
        toponym_refs=toponym_refs,
        tonality=tonality,
        cluster_id=cluster_id,
    )


def make_article(
    ext_id: str,
    body: str,
    title: str = "Untitled report",
    source_id: str = "src-1",
    published_at: datetime | None = None,
    minutes: float = 0.0,
) -> RawArticle:
    published = published_at if published_at is not None else T0 + timedelta(minutes=minutes)
    return RawArticle(
        external_id=ext_id,
        source_id=source_id,
        url=f"http://example.test/{ext_id}",
        title=title,
        body=body,
        published_at=published,
        fetched_at=published + timedelta(minutes=1),
    )


@pytest.fixture
def registry() -> dict[str, Source]:
    sources = [
        Source(id="src-1", name="Example Wire", country="DE", default_language="de", kind="news"),
        Source(id="src-2", name="Example Post", country="FR", default_language="fr", kind="news"),
        Source(id="src-3", name="Example Feed", country="US", default_language="en", kind="agency"),
    ]
    return {s.id: s for s in sources}
