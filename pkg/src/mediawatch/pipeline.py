"""End-to-end batch pipeline: corpus -> language/dedup -> enrichment ->
window clustering -> store -> stories.

Every stage is deterministic for a fixed corpus and config: articles are
processed in (published_at, external_id) order, window ticks follow the
bucket grid, and all tie-breaks are fixed, so two runs over the same input
produce byte-identical store segments and exports.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from datetime import datetime, timedelta

from . import resources
from .clustering import (
    BUCKET_SECONDS,
    DEFAULT_THRESHOLD,
    DEFAULT_WINDOW_HOURS,
    METADATA_LINK_THRESHOLD,
    STORY_LOOKBACK_DAYS,
    Cluster,
    ClusterDoc,
    ClusterWindow,
    StoryIndex,
    bucket_floor,
    cluster_window,
    link_cross_lingual,
    select_medoid,
    vectorize,
)
from .errors import ConfigError
from .ingest import (
    DEDUP_WINDOW_HOURS,
    Ingestor,
    RawArticle,
    Source,
    default_profiles,
    load_sources,
    read_corpus,
)
from .linguistic import (
    EntityIndex,
    TonalityLexicon,
    ToponymIndex,
    categorize,
    extract_quotes,
    geotag,
    load_category_rules,
    load_entities,
    load_tonality_lexicon,
    load_toponyms,
    recognize_entities,
    tonality,
)
from .store import ArticleRecord, ArticleStore, ToponymRef, make_snippet
from .textutil import rfc3339


@dataclass
class PipelineConfig:
    sources_path: str
    category_rules_path: str | None = None
    entities_path: str | None = None
    toponyms_path: str | None = None
    lexicon_dir: str | None = None
    window_hours: dict[str, float] = field(default_factory=dict)
    default_window_hours: float = DEFAULT_WINDOW_HOURS
    clustering_threshold: float = DEFAULT_THRESHOLD
    link_threshold: float = METADATA_LINK_THRESHOLD
    bucket_seconds: int = BUCKET_SECONDS
    dedup_window_hours: float = DEDUP_WINDOW_HOURS
    alert_floor: float = 0.5
    alert_high: float = 4.0
    alert_medium: float = 2.0
    alert_min_support: int = 2
    story_lookback_days: int = STORY_LOOKBACK_DAYS
    retention_days: int = 400
    top_n: int = 10

    def validate(self) -> None:
        if not 0.0 < self.clustering_threshold <= 1.0:
            raise ConfigError(f"clustering threshold {self.clustering_threshold} outside (0, 1]")
        if not 0.0 < self.link_threshold <= 1.0:
            raise ConfigError(f"link threshold {self.link_threshold} outside (0, 1]")
        if self.alert_floor <= 0:
            raise ConfigError("alert floor must be positive")
        if self.alert_medium > self.alert_high:
            raise ConfigError("alert medium threshold above high threshold")
        if self.alert_min_support < 1:
            raise ConfigError("alert min support must be >= 1")
        if self.bucket_seconds <= 0 or self.retention_days <= 0 or self.top_n < 1:
            raise ConfigError("bucket seconds, retention and top-n must be positive")
        for label, path in (
            ("sources", self.sources_path),
            ("category_rules", self.category_rules_path),
            ("entities", self.entities_path),
            ("toponyms", self.toponyms_path),
        ):
            if path is not None and not os.path.exists(path):
                raise ConfigError(f"{label} file not found: {path}")

    def window_for(self, language: str) -> float:
        return self.window_hours.get(language, self.default_window_hours)

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        base = os.path.dirname(os.path.abspath(os.fspath(path)))
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

        def resolve(value):
            if value is None:
                return None
            return value if os.path.isabs(value) else os.path.join(base, value)

        windows = dict(raw.get("window_hours", {}))
        default_window = float(windows.pop("default", DEFAULT_WINDOW_HOURS))
        alert = raw.get("alert", {})
        config = cls(
            sources_path=resolve(raw.get("sources")),
            category_rules_path=resolve(raw.get("category_rules")),
            entities_path=resolve(raw.get("entities")),
            toponyms_path=resolve(raw.get("toponyms")),
            lexicon_dir=resolve(raw.get("lexicon_dir")),
            window_hours={k: float(v) for k, v in windows.items()},
            default_window_hours=default_window,
            clustering_threshold=float(raw.get("clustering_threshold", DEFAULT_THRESHOLD)),
            link_threshold=float(raw.get("link_threshold", METADATA_LINK_THRESHOLD)),
            bucket_seconds=int(raw.get("bucket_seconds", BUCKET_SECONDS)),
            dedup_window_hours=float(raw.get("dedup_window_hours", DEDUP_WINDOW_HOURS)),
            alert_floor=float(alert.get("floor", 0.5)),
            alert_high=float(alert.get("high", 4.0)),
            alert_medium=float(alert.get("medium", 2.0)),
            alert_min_support=int(alert.get("min_support", 2)),
            story_lookback_days=int(raw.get("story_lookback_days", STORY_LOOKBACK_DAYS)),
            retention_days=int(raw.get("retention_days", 400)),
            top_n=int(raw.get("top_n", 10)),
        )
        if config.sources_path is None:
            raise ConfigError("config is missing 'sources'")
        config.validate()
        return config


@dataclass
class EnrichedArticle:
    article: RawArticle
    language: str
    categories: frozenset[str]
    entity_ids: frozenset[int]
    toponym_refs: tuple[ToponymRef, ...]
    quotes: list
    tonality: float


@dataclass
class RunReport:
    parsed: int = 0
    accepted: int = 0
    duplicates: int = 0
    unknown_sources: int = 0
    committed: int = 0
    quotes: int = 0
    unbalanced_quotes: int = 0
    live_clusters: int = 0
    daily_clusters: int = 0
    stories: int = 0
    languages: dict[str, int] = field(default_factory=dict)
    stage_ms: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "parsed": self.parsed,
            "accepted": self.accepted,
            "duplicates": self.duplicates,
            "unknown_sources": self.unknown_sources,
            "committed": self.committed,
            "quotes": self.quotes,
            "unbalanced_quotes": self.unbalanced_quotes,
            "live_clusters": self.live_clusters,
            "daily_clusters": self.daily_clusters,
            "stories": self.stories,
            "languages": dict(sorted(self.languages.items())),
            "stage_ms": {k: round(v, 3) for k, v in self.stage_ms.items()},
        }


class _Stopwatch:
    def __init__(self, report: RunReport):
        self.report = report

    def __call__(self, stage: str):
        return _StageTimer(self.report, stage)


class _StageTimer:
    def __init__(self, report: RunReport, stage: str):
        self.report = report
        self.stage = stage

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.report.stage_ms[self.stage] = (time.perf_counter() - self.start) * 1000.0
        return False


@dataclass
class EnrichmentContext:
    registry: dict[str, Source]
    rules: list
    entity_index: EntityIndex
    toponym_index: ToponymIndex
    entities_by_id: dict
    lexicons: dict[str, TonalityLexicon]

    @classmethod
    def from_config(cls, config: PipelineConfig) -> "EnrichmentContext":
        registry = load_sources(config.sources_path)
        rules = load_category_rules(config.category_rules_path) if config.category_rules_path else []
        entities = load_entities(config.entities_path) if config.entities_path else []
        toponyms = load_toponyms(config.toponyms_path) if config.toponyms_path else []
        lexicons: dict[str, TonalityLexicon] = {}
        if config.lexicon_dir:
            for name in sorted(os.listdir(config.lexicon_dir)):
                if name.endswith(".tsv"):
                    language = name[:-4]
                    lexicons[language] = load_tonality_lexicon(
                        os.path.join(config.lexicon_dir, name), language
                    )
        return cls(
            registry=registry,
            rules=rules,
            entity_index=EntityIndex(entities),
            toponym_index=ToponymIndex(toponyms),
            entities_by_id={e.id: e for e in entities},
            lexicons=lexicons,
        )

    def lexicon_for(self, language: str) -> TonalityLexicon:
        if language in self.lexicons:
            return self.lexicons[language]
        terms = resources.tonality_terms(language)
        return TonalityLexicon(language=language, term_scores=terms)


def enrich_article(article: RawArticle, language: str, ctx: EnrichmentContext) -> EnrichedArticle:
    text = article.text
    source = ctx.registry[article.source_id]
    categories = categorize(text, ctx.rules, language=language)
    mentions = recognize_entities(text, ctx.entity_index, article_id=article.external_id)
    places = geotag(
        text,
        mentions,
        ctx.toponym_index,
        source_country=source.country,
        entities_by_id=ctx.entities_by_id,
    )
    refs = []
    seen = set()
    for place in places:
        key = (place.toponym.name, place.toponym.country)
        if key not in seen:
            seen.add(key)
            refs.append(
                ToponymRef(
                    name=place.toponym.name,
                    country=place.toponym.country,
                    latitude=place.toponym.latitude,
                    longitude=place.toponym.longitude,
                )
            )
    extraction = extract_quotes(text, mentions, resources.reporting_verbs(language), article_id=article.external_id)
    tone = tonality(text, ctx.lexicon_for(language), resources.negators(language))
    return EnrichedArticle(
        article=article,
        language=language,
        categories=frozenset(categories),
        entity_ids=frozenset(m.entity_id for m in mentions),
        toponym_refs=tuple(refs),
        quotes=extraction.quotes,
        tonality=tone,
    )


def _cluster_doc(enriched: EnrichedArticle) -> ClusterDoc:
    return ClusterDoc(
        article_id=enriched.article.external_id,
        language=enriched.language,
        title=enriched.article.title,
        text=enriched.article.text,
        published_at=enriched.article.published_at,
        categories=enriched.categories,
        entity_ids=enriched.entity_ids,
    )


def replay_windows(
    enriched: list[EnrichedArticle],
    config: PipelineConfig,
) -> dict[str, ClusterWindow]:
    """Replay articles through per-language sliding windows on the bucket
    grid. Ticks happen at arrival buckets and at cluster-expiry boundaries,
    which is observationally identical to ticking every bucket."""
    windows: dict[str, ClusterWindow] = {}
    by_language: dict[str, list[EnrichedArticle]] = {}
    for item in enriched:
        by_language.setdefault(item.language, []).append(item)
    # liveness is judged at the end of the whole corpus, not per language
    end_clock = bucket_floor(
        max(e.article.published_at for e in enriched), config.bucket_seconds
    )
    for language in sorted(by_language):
        window = ClusterWindow(
            language,
            window_hours=config.window_for(language),
            threshold=config.clustering_threshold,
            bucket_seconds=config.bucket_seconds,
            stopwords=resources.stopwords(language),
        )
        items = sorted(by_language[language], key=lambda e: (e.article.published_at, e.article.external_id))
        pending = list(items)
        clock: datetime | None = None
        while pending:
            arrival_bucket = bucket_floor(pending[0].article.published_at, config.bucket_seconds)
            # run any expiries that fall strictly before the next arrival
            while True:
                expiry = _next_expiry(window, config.window_for(language), config.bucket_seconds)
                if expiry is None or expiry >= arrival_bucket or (clock is not None and expiry <= clock):
                    break
                window.tick(expiry)
                clock = expiry
            batch = []
            while pending and bucket_floor(pending[0].article.published_at, config.bucket_seconds) == arrival_bucket:
                batch.append(_cluster_doc(pending.pop(0)))
            window.tick(arrival_bucket, batch)
            clock = arrival_bucket
        # final expiries up to the end of the corpus
        while True:
            expiry = _next_expiry(window, config.window_for(language), config.bucket_seconds)
            if expiry is None or expiry > end_clock or (clock is not None and expiry <= clock):
                break
            window.tick(expiry)
            clock = expiry
        if clock is None or clock < end_clock:
            window.tick(end_clock)
        windows[language] = window
    return windows


def _next_expiry(window: ClusterWindow, window_hours: float, bucket_seconds: int) -> datetime | None:
    """Earliest bucket at which some live cluster loses its last in-window
    member. Membership at exactly the horizon still counts as in-window,
    so the expiry tick is the first bucket strictly after it."""
    snapshot = window.snapshot()
    if not snapshot:
        return None
    horizon = timedelta(hours=window_hours)
    earliest = None
    for cluster in snapshot.values():
        newest = max(window.doc_published(m) for m in cluster.member_ids)
        bucket = bucket_floor(newest + horizon, bucket_seconds) + timedelta(seconds=bucket_seconds)
        if earliest is None or bucket < earliest:
            earliest = bucket
    return earliest


def daily_clusters_and_stories(
    enriched: list[EnrichedArticle],
    config: PipelineConfig,
) -> tuple[list[dict], list[dict]]:
    """Calendar-day clustering per language feeding the story chains, plus
    same-day cross-lingual story links."""
    by_language: dict[str, list[EnrichedArticle]] = {}
    for item in enriched:
        by_language.setdefault(item.language, []).append(item)

    cluster_rows: list[dict] = []
    story_indexes: dict[str, StoryIndex] = {}
    story_of_cluster: dict[str, str] = {}
    clusters_by_day: dict = {}

    for language in sorted(by_language):
        story_indexes[language] = StoryIndex(
            language, lookback_days=config.story_lookback_days, threshold=config.link_threshold
        )
        by_day: dict = {}
        for item in by_language[language]:
            by_day.setdefault(item.article.published_at.date(), []).append(item)
        for day in sorted(by_day):
            items = sorted(by_day[day], key=lambda e: e.article.external_id)
            docs = [_cluster_doc(e) for e in items]
            vectors = vectorize(docs, resources.stopwords(language))
            vec_map = {v.article_id: v.weights for v in vectors}
            published = {d.article_id: d.published_at for d in docs}
            doc_map = {d.article_id: d for d in docs}
            partition = cluster_window(vectors, config.clustering_threshold)
            for seq, part in enumerate(partition, start=1):
                cluster_id = f"{language}-d{day.isoformat()}-{seq}"
                medoid = select_medoid(part, vec_map, {m: published[m] for m in part})
                categories: dict[str, int] = {}
                entities: dict[int, int] = {}
                for member in part:
                    for cat in doc_map[member].categories:
                        categories[cat] = categories.get(cat, 0) + 1
                    for eid in doc_map[member].entity_ids:
                        entities[eid] = entities.get(eid, 0) + 1
                snapshot = Cluster(
                    id=cluster_id,
                    language=language,
                    member_ids=part,
                    centroid={},
                    medoid_id=medoid,
                    window_start=min(published[m] for m in part),
                    window_end=max(published[m] for m in part),
                    categories=categories,
                    entities=entities,
                    size_history=(),
                )
                story_id = story_indexes[language].attach(snapshot, day, doc_map[medoid].title)
                story_of_cluster[cluster_id] = story_id
                clusters_by_day.setdefault(day, []).append(snapshot)
                cluster_rows.append(
                    {
                        "id": cluster_id,
                        "kind": "daily",
                        "language": language,
                        "day": day.isoformat(),
                        "member_ids": list(part),
                        "medoid_id": medoid,
                        "medoid_title": doc_map[medoid].title,
                        "story_id": story_id,
                        "categories": categories,
                        "entities": {str(k): v for k, v in entities.items()},
                    }
                )

    # same-day cross-lingual links between daily clusters
    cross_links: dict[str, set[tuple[str, str]]] = {}
    for day, snapshots in clusters_by_day.items():
        ordered = sorted(snapshots, key=lambda c: c.id)
        for i, a in enumerate(ordered):
            for b in ordered[i + 1 :]:
                if a.language == b.language:
                    continue
                if link_cross_lingual(a, b, config.link_threshold):
                    story_a, story_b = story_of_cluster[a.id], story_of_cluster[b.id]
                    cross_links.setdefault(story_a, set()).add((b.language, story_b))
                    cross_links.setdefault(story_b, set()).add((a.language, story_a))

    story_rows = []
    for language in sorted(story_indexes):
        for story_id in sorted(story_indexes[language].stories):
            story = story_indexes[language].stories[story_id]
            story_rows.append(
                {
                    "id": story.id,
                    "language": story.language,
                    "days": {
                        d.isoformat(): {
                            "cluster_id": story.daily_cluster_ids[d],
                            "title": story.title_per_day[d],
                            "size": story.daily_sizes[d],
                        }
                        for d in sorted(story.daily_cluster_ids)
                    },
                    "cross_links": sorted(list(link) for link in cross_links.get(story.id, set())),
                }
            )
    return cluster_rows, story_rows


def run_pipeline(corpus_path, config: PipelineConfig, store_dir, with_clustering: bool = True) -> RunReport:
    report = RunReport()
    timer = _Stopwatch(report)

    with timer("parse"):
        articles = read_corpus(corpus_path)
        report.parsed = len(articles)
        articles.sort(key=lambda a: (a.published_at, a.external_id))

    ctx = EnrichmentContext.from_config(config)

    with timer("ingest"):
        ingestor = Ingestor(ctx.registry, default_profiles(), window_hours=config.dedup_window_hours)
        ingest_report = ingestor.ingest_batch(articles)
        report.accepted = ingest_report.accepted
        report.duplicates = ingest_report.duplicates
        report.unknown_sources = ingest_report.unknown_sources
        report.languages = dict(ingest_report.language_histogram)

    with timer("enrich"):
        enriched = [
            enrich_article(accepted.article, accepted.language, ctx)
            for accepted in ingest_report.accepted_articles
        ]

    with timer("cluster"):
        windows = replay_windows(enriched, config) if (enriched and with_clustering) else {}
        live_rows = []
        assignment: dict[str, str] = {}
        for language in sorted(windows):
            window = windows[language]
            for cluster_id, cluster in window.snapshot().items():
                for member in cluster.member_ids:
                    assignment[member] = cluster_id
                live_rows.append(
                    {
                        "id": cluster_id,
                        "kind": "window",
                        "language": language,
                        "member_ids": list(cluster.member_ids),
                        "medoid_id": cluster.medoid_id,
                        "medoid_title": window.doc_title(cluster.medoid_id),
                        "window_start": rfc3339(cluster.window_start),
                        "window_end": rfc3339(cluster.window_end),
                        "categories": cluster.categories,
                        "entities": {str(k): v for k, v in cluster.entities.items()},
                        "size_history": [[rfc3339(b), c] for b, c in cluster.size_history],
                    }
                )
        report.live_clusters = len(live_rows)

    with timer("stories"):
        if enriched and with_clustering:
            daily_rows, story_rows = daily_clusters_and_stories(enriched, config)
        else:
            daily_rows, story_rows = [], []
        report.daily_clusters = len(daily_rows)
        report.stories = len(story_rows)

    with timer("store"):
        store = ArticleStore(store_dir)
        for item in enriched:
            article = item.article
            record = ArticleRecord(
                id=article.external_id,
                source_id=article.source_id,
                url=article.url,
                title=article.title,
                snippet=make_snippet(article.body),
                language=item.language,
                country_of_source=ctx.registry[article.source_id].country,
                published_at=article.published_at,
                categories=item.categories,
                entity_ids=item.entity_ids,
                toponym_refs=item.toponym_refs,
                tonality=item.tonality,
                cluster_id=assignment.get(article.external_id),
            )
            store.commit(record, quotes=item.quotes)
            report.committed += 1
            report.quotes += len(item.quotes)
        store.save_clusters(live_rows + daily_rows)
        store.save_stories(story_rows)

    return report
