"""Metadata store: append-only JSON Lines segments, an in-memory inverted
index and the day/country/category/language count cube.

Full article text never reaches this layer: records carry the title plus a
snippet capped at 40 body words, everything else is extracted metadata.
Reopening a store rebuilds every derived structure from the segments, so
any reopened store answers queries exactly like the original.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta

from .errors import DuplicateId
from .linguistic import Quote
from .textutil import parse_rfc3339, rfc3339, tokenize

SNIPPET_WORDS = 40
UNCATEGORIZED = ""

ARTICLES_FILE = "articles.jsonl"
QUOTES_FILE = "quotes.jsonl"
CLUSTERS_FILE = "clusters.jsonl"
STORIES_FILE = "stories.jsonl"


def make_snippet(body: str, cap: int = SNIPPET_WORDS) -> str:
    """First `cap` whitespace-separated body words; the copyright boundary."""
    return " ".join(body.split()[:cap])


@dataclass(frozen=True)
class ToponymRef:
    name: str
    country: str
    latitude: float
    longitude: float


@dataclass(frozen=True)
class ArticleRecord:
    id: str
    source_id: str
    url: str
    title: str
    snippet: str
    language: str
    country_of_source: str
    published_at: datetime
    categories: frozenset[str] = frozenset()
    entity_ids: frozenset[int] = frozenset()
    toponym_refs: tuple[ToponymRef, ...] = ()
    tonality: float = 0.0
    cluster_id: str | None = None

    def __post_init__(self):
        if len(self.snippet.split()) > SNIPPET_WORDS:
            raise ValueError(f"record {self.id!r}: snippet over {SNIPPET_WORDS} words")

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "source_id": self.source_id,
            "url": self.url,
            "title": self.title,
            "snippet": self.snippet,
            "language": self.language,
            "country_of_source": self.country_of_source,
            "published_at": rfc3339(self.published_at),
            "categories": sorted(self.categories),
            "entity_ids": sorted(self.entity_ids),
            "toponym_refs": [
                {"name": r.name, "country": r.country, "latitude": r.latitude, "longitude": r.longitude}
                for r in self.toponym_refs
            ],
            "tonality": self.tonality,
            "cluster_id": self.cluster_id,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ArticleRecord":
        return cls(
            id=obj["id"],
            source_id=obj["source_id"],
            url=obj["url"],
            title=obj["title"],
            snippet=obj["snippet"],
            language=obj["language"],
            country_of_source=obj["country_of_source"],
            published_at=parse_rfc3339(obj["published_at"]),
            categories=frozenset(obj.get("categories", [])),
            entity_ids=frozenset(obj.get("entity_ids", [])),
            toponym_refs=tuple(
                ToponymRef(r["name"], r["country"], r["latitude"], r["longitude"])
                for r in obj.get("toponym_refs", [])
            ),
            tonality=obj.get("tonality", 0.0),
            cluster_id=obj.get("cluster_id"),
        )


@dataclass
class CountCube:
    """(day, country, category, language) -> count, plus global daily totals.

    Uncategorized articles land under the empty-string category so each
    article contributes at least one cube entry; multi-category articles
    contribute one entry per category.
    """

    counts: dict[tuple[date, str, str, str], int] = field(default_factory=dict)
    global_daily: dict[date, int] = field(default_factory=dict)

    def add(self, record: ArticleRecord) -> None:
        day = record.published_at.date()
        categories = sorted(record.categories) or [UNCATEGORIZED]
        for category in categories:
            key = (day, record.country_of_source, category, record.language)
            self.counts[key] = self.counts.get(key, 0) + 1
        self.global_daily[day] = self.global_daily.get(day, 0) + 1

    def day_total(self, day: date) -> int:
        return sum(count for (d, _, _, _), count in self.counts.items() if d == day)


class ArticleStore:
    """Single-writer, many-reader article metadata store."""

    def __init__(self, directory):
        self.directory = os.fspath(directory)
        os.makedirs(self.directory, exist_ok=True)
        self.records: dict[str, ArticleRecord] = {}
        self.quotes: list[Quote] = []
        self.clusters: dict[str, dict] = {}
        self.stories: dict[str, dict] = {}
        self._index: dict[str, set[str]] = {}
        self.cube = CountCube()
        self._load()

    # -- persistence -----------------------------------------------------------

    def _path(self, name: str) -> str:
        return os.path.join(self.directory, name)

    def _load(self) -> None:
        if os.path.exists(self._path(ARTICLES_FILE)):
            with open(self._path(ARTICLES_FILE), "r", encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        self._admit(ArticleRecord.from_json(json.loads(line)))
        if os.path.exists(self._path(QUOTES_FILE)):
            with open(self._path(QUOTES_FILE), "r", encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        obj = json.loads(line)
                        self.quotes.append(
                            Quote(
                                article_id=obj["article_id"],
                                speaker_entity=obj.get("speaker_entity"),
                                text=obj["text"],
                                mentioned_entities=frozenset(obj.get("mentioned_entities", [])),
                            )
                        )
        for name, target in ((CLUSTERS_FILE, self.clusters), (STORIES_FILE, self.stories)):
            if os.path.exists(self._path(name)):
                with open(self._path(name), "r", encoding="utf-8") as fh:
                    for line in fh:
                        if line.strip():
                            obj = json.loads(line)
                            target[obj["id"]] = obj

    def _admit(self, record: ArticleRecord) -> None:
        if record.id in self.records:
            raise DuplicateId(record.id)
        self.records[record.id] = record
        for token in set(tokenize(record.title + " " + record.snippet)):
            self._index.setdefault(token, set()).add(record.id)
        self.cube.add(record)

    def commit(self, record: ArticleRecord, quotes: list[Quote] = ()) -> ArticleRecord:
        """Persist a record (and its quotes); index and cube update with it."""
        self._admit(record)
        with open(self._path(ARTICLES_FILE), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record.to_json(), ensure_ascii=False, sort_keys=True) + "\n")
        if quotes:
            with open(self._path(QUOTES_FILE), "a", encoding="utf-8") as fh:
                for quote in quotes:
                    fh.write(
                        json.dumps(
                            {
                                "article_id": quote.article_id,
                                "speaker_entity": quote.speaker_entity,
                                "text": quote.text,
                                "mentioned_entities": sorted(quote.mentioned_entities),
                            },
                            ensure_ascii=False,
                            sort_keys=True,
                        )
                        + "\n"
                    )
            self.quotes.extend(quotes)
        return record

    def save_clusters(self, clusters: list[dict]) -> None:
        self.clusters = {c["id"]: c for c in clusters}
        with open(self._path(CLUSTERS_FILE), "w", encoding="utf-8") as fh:
            for cluster in sorted(clusters, key=lambda c: c["id"]):
                fh.write(json.dumps(cluster, ensure_ascii=False, sort_keys=True) + "\n")

    def save_stories(self, stories: list[dict]) -> None:
        self.stories = {s["id"]: s for s in stories}
        with open(self._path(STORIES_FILE), "w", encoding="utf-8") as fh:
            for story in sorted(stories, key=lambda s: s["id"]):
                fh.write(json.dumps(story, ensure_ascii=False, sort_keys=True) + "\n")

    def purge(self, max_age_days: int, now: datetime) -> int:
        """Drop records older than the retention horizon and rewrite segments."""
        horizon = now - timedelta(days=max_age_days)
        keep = [r for r in self.records.values() if r.published_at >= horizon]
        dropped = len(self.records) - len(keep)
        if not dropped:
            return 0
        keep_ids = {r.id for r in keep}
        with open(self._path(ARTICLES_FILE), "w", encoding="utf-8") as fh:
            for record in sorted(keep, key=lambda r: (r.published_at, r.id)):
                fh.write(json.dumps(record.to_json(), ensure_ascii=False, sort_keys=True) + "\n")
        kept_quotes = [q for q in self.quotes if q.article_id in keep_ids]
        with open(self._path(QUOTES_FILE), "w", encoding="utf-8") as fh:
            for quote in kept_quotes:
                fh.write(
                    json.dumps(
                        {
                            "article_id": quote.article_id,
                            "speaker_entity": quote.speaker_entity,
                            "text": quote.text,
                            "mentioned_entities": sorted(quote.mentioned_entities),
                        },
                        ensure_ascii=False,
                        sort_keys=True,
                    )
                    + "\n"
                )
        self.records = {}
        self.quotes = []
        self._index = {}
        self.cube = CountCube()
        for record in keep:
            self._admit(record)
        self.quotes = kept_quotes
        return dropped

    # -- queries ------------------------------------------------------------------

    def get(self, article_id: str) -> ArticleRecord | None:
        return self.records.get(article_id)

    def search(
        self,
        query: str,
        language: str | None = None,
        country: str | None = None,
        category: str | None = None,
        entity_id: int | None = None,
        date_from: datetime | None = None,
        date_to: datetime | None = None,
        limit: int | None = None,
    ) -> list[str]:
        """Conjunctive term match over title+snippet tokens, newest first."""
        terms = tokenize(query)
        if terms:
            sets = [self._index.get(term, set()) for term in terms]
            ids = set.intersection(*sets) if sets else set()
        else:
            ids = set(self.records)
        hits = []
        for article_id in ids:
            record = self.records[article_id]
            if language is not None and record.language != language:
                continue
            if country is not None and record.country_of_source != country:
                continue
            if category is not None and category not in record.categories:
                continue
            if entity_id is not None and entity_id not in record.entity_ids:
                continue
            if date_from is not None and record.published_at < date_from:
                continue
            if date_to is not None and record.published_at > date_to:
                continue
            hits.append(record)
        hits.sort(key=lambda r: (-r.published_at.timestamp(), r.id))
        ids_sorted = [r.id for r in hits]
        return ids_sorted[:limit] if limit is not None else ids_sorted

    def counts(
        self,
        group_by: tuple[str, ...],
        day_from: date | None = None,
        day_to: date | None = None,
        country: str | None = None,
        category: str | None = None,
        language: str | None = None,
    ) -> list[tuple[tuple, int]]:
        """Exact aggregation over the cube; group_by dims from
        (day, country, category, language)."""
        dims = ("day", "country", "category", "language")
        for dim in group_by:
            if dim not in dims:
                raise ValueError(f"unknown dimension {dim!r}")
        rows: dict[tuple, int] = {}
        for (day, ctry, cat, lang), count in self.cube.counts.items():
            if day_from is not None and day < day_from:
                continue
            if day_to is not None and day > day_to:
                continue
            if country is not None and ctry != country:
                continue
            if category is not None and cat != category:
                continue
            if language is not None and lang != language:
                continue
            values = {"day": day, "country": ctry, "category": cat, "language": lang}
            key = tuple(values[dim] for dim in group_by)
            rows[key] = rows.get(key, 0) + count
        return sorted(rows.items(), key=lambda item: tuple(str(k) for k in item[0]))

    def observed_in_window(self, start: datetime, end: datetime) -> dict[tuple[str, str], int]:
        """Per (country, category) article counts in [start, end); sub-day
        precision straight from the records, for the 24h alert window."""
        observed: dict[tuple[str, str], int] = {}
        for record in self.records.values():
            if not (start <= record.published_at < end):
                continue
            for category in record.categories or {UNCATEGORIZED}:
                key = (record.country_of_source, category)
                observed[key] = observed.get(key, 0) + 1
        return observed

    def earliest_day(self) -> date | None:
        days = self.cube.global_daily
        return min(days) if days else None
