"""Article intake: corpus reading, language identification, near-duplicate
removal and the source registry.

Language identification is character n-gram (1..4) cosine against
per-language profiles built from small bundled seed texts; anything below
similarity 0.25 is "und". Deduplication is word 4-shingle Jaccard at 0.85,
scoped to a 24-hour window within one language.
"""

from __future__ import annotations

import json
import re
import threading
import time as _time
import xml.etree.ElementTree as ET
from collections import Counter, deque
from dataclasses import dataclass, field
from datetime import datetime, timedelta

from .errors import CorpusParseError, TextTooShort
from .resources import seed_languages, seed_text
from .textutil import char_ngrams, cosine, jaccard, parse_rfc3339, tokenize, word_shingles

SOURCE_KINDS = ("news", "agency", "social", "government")

_ALPHA2_RE = re.compile(r"^[A-Z]{2}$")

MIN_LANGID_CHARS = 20
LANGID_THRESHOLD = 0.25
DEDUP_JACCARD = 0.85
DEDUP_WINDOW_HOURS = 24.0


@dataclass(frozen=True)
class Source:
    id: str
    name: str
    country: str  # ISO-3166 alpha-2, "ZZ" when unknown
    default_language: str  # ISO-639-1 or "und"
    kind: str
    url: str = ""

    def __post_init__(self):
        if not _ALPHA2_RE.match(self.country):
            raise ValueError(f"source {self.id!r}: country {self.country!r} is not alpha-2")
        if self.kind not in SOURCE_KINDS:
            raise ValueError(f"source {self.id!r}: kind {self.kind!r} not one of {SOURCE_KINDS}")


@dataclass(frozen=True)
class RawArticle:
    external_id: str
    source_id: str
    url: str
    title: str
    body: str  # full text, transient: never persisted beyond the snippet
    published_at: datetime
    fetched_at: datetime

    def __post_init__(self):
        if not self.title.strip():
            raise ValueError(f"article {self.external_id!r}: empty title")
        if self.published_at > self.fetched_at:
            raise ValueError(f"article {self.external_id!r}: published_at after fetched_at")

    @property
    def text(self) -> str:
        return f"{self.title}\n{self.body}"


@dataclass(frozen=True)
class LanguageProfile:
    language: str
    ngram_weights: dict[str, float]

    @classmethod
    def from_text(cls, language: str, text: str) -> "LanguageProfile":
        counts = char_ngrams(text)
        total = sum(counts.values())
        weights = {g: c / total for g, c in counts.items()} if total else {}
        return cls(language=language, ngram_weights=weights)


def default_profiles() -> list[LanguageProfile]:
    return [LanguageProfile.from_text(code, seed_text(code)) for code in seed_languages()]


def identify_language(text: str, profiles: list[LanguageProfile]) -> str:
    """Best-profile language code, or "und" below the similarity threshold.

    Ties break to the lexicographically smallest code so the result is a
    pure function of (text, profiles).
    """
    if len(text.strip()) < MIN_LANGID_CHARS:
        raise TextTooShort(f"need >= {MIN_LANGID_CHARS} chars, got {len(text.strip())}")
    vector = char_ngrams(text)
    best_code = "und"
    best_sim = 0.0
    for profile in sorted(profiles, key=lambda p: p.language):
        sim = cosine(vector, profile.ngram_weights)
        if sim > best_sim:
            best_sim = sim
            best_code = profile.language
    if best_sim < LANGID_THRESHOLD:
        return "und"
    return best_code


def _shingles(article: RawArticle) -> frozenset:
    return word_shingles(tokenize(article.title + " " + article.body))


def near_duplicate(a: RawArticle, b: RawArticle, threshold: float = DEDUP_JACCARD) -> bool:
    """Word 4-shingle Jaccard of title+body at or above the threshold."""
    return jaccard(_shingles(a), _shingles(b)) >= threshold


@dataclass
class AcceptedArticle:
    article: RawArticle
    language: str


@dataclass
class IngestReport:
    accepted: int = 0
    duplicates: int = 0
    unknown_sources: int = 0
    unknown_source_ids: list[str] = field(default_factory=list)
    language_histogram: Counter = field(default_factory=Counter)
    accepted_articles: list[AcceptedArticle] = field(default_factory=list)

    def merge(self, other: "IngestReport") -> None:
        self.accepted += other.accepted
        self.duplicates += other.duplicates
        self.unknown_sources += other.unknown_sources
        self.unknown_source_ids.extend(other.unknown_source_ids)
        self.language_histogram.update(other.language_histogram)
        self.accepted_articles.extend(other.accepted_articles)


class Ingestor:
    """Stateful intake front end: language id, then per-language dedup.

    The dedup index is the only shared mutable state; it is guarded by one
    lock per language so concurrent batches serialize only within a
    language partition.
    """

    def __init__(
        self,
        registry: dict[str, Source],
        profiles: list[LanguageProfile] | None = None,
        window_hours: float = DEDUP_WINDOW_HOURS,
        jaccard_threshold: float = DEDUP_JACCARD,
    ):
        self.registry = dict(registry)
        self.profiles = profiles if profiles is not None else default_profiles()
        self.window = timedelta(hours=window_hours)
        self.jaccard_threshold = jaccard_threshold
        self._seen: dict[str, deque] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _language_lock(self, language: str) -> threading.Lock:
        with self._locks_guard:
            if language not in self._locks:
                self._locks[language] = threading.Lock()
                self._seen[language] = deque()
            return self._locks[language]

    def _language_of(self, article: RawArticle) -> str:
        try:
            return identify_language(article.text, self.profiles)
        except TextTooShort:
            return "und"

    def _is_duplicate(self, language: str, article: RawArticle) -> bool:
        """Check-and-insert against the language's 24h shingle index."""
        shingles = _shingles(article)
        with self._language_lock(language):
            index = self._seen[language]
            while index and index[0][0] < article.published_at - self.window:
                index.popleft()
            for seen_at, seen_shingles in index:
                if abs(article.published_at - seen_at) <= self.window:
                    if jaccard(shingles, seen_shingles) >= self.jaccard_threshold:
                        return True
            index.append((article.published_at, shingles))
        return False

    def ingest_batch(self, records: list[RawArticle]) -> IngestReport:
        report = IngestReport()
        for record in records:
            if record.source_id not in self.registry:
                report.unknown_sources += 1
                report.unknown_source_ids.append(record.source_id)
                continue
            language = self._language_of(record)
            if self._is_duplicate(language, record):
                report.duplicates += 1
                continue
            report.accepted += 1
            report.language_histogram[language] += 1
            report.accepted_articles.append(AcceptedArticle(record, language))
        return report


# -- corpus and registry files ------------------------------------------------

CORPUS_FIELDS = ("external_id", "source_id", "url", "title", "body", "published_at", "fetched_at")


def parse_corpus_line(obj: dict, lineno: int) -> RawArticle:
    missing = [f for f in CORPUS_FIELDS if f not in obj]
    if missing:
        raise CorpusParseError(f"missing fields {missing}", lineno)
    try:
        return RawArticle(
            external_id=str(obj["external_id"]),
            source_id=str(obj["source_id"]),
            url=str(obj["url"]),
            title=str(obj["title"]),
            body=str(obj["body"]),
            published_at=parse_rfc3339(obj["published_at"]),
            fetched_at=parse_rfc3339(obj["fetched_at"]),
        )
    except (ValueError, TypeError) as exc:
        raise CorpusParseError(str(exc), lineno) from exc


def read_corpus(path) -> list[RawArticle]:
    """JSON Lines corpus, one RawArticle per line."""
    articles = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusParseError(f"invalid JSON: {exc.msg}", lineno) from exc
            articles.append(parse_corpus_line(obj, lineno))
    return articles


def load_sources(path) -> dict[str, Source]:
    """JSON array of Source records, keyed by unique id."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    registry: dict[str, Source] = {}
    for obj in raw:
        source = Source(
            id=str(obj["id"]),
            name=str(obj.get("name", obj["id"])),
            country=str(obj.get("country", "ZZ")),
            default_language=str(obj.get("default_language", "und")),
            kind=str(obj.get("kind", "news")),
            url=str(obj.get("url", "")),
        )
        if source.id in registry:
            raise ValueError(f"duplicate source id {source.id!r}")
        registry[source.id] = source
    return registry


# -- thin live-feed adapter ---------------------------------------------------

def parse_feed_xml(xml_text: str, source_id: str, fetched_at: datetime) -> list[RawArticle]:
    """Minimal RSS item adapter: title/link/pubDate/description only."""
    root = ET.fromstring(xml_text)
    articles = []
    for item in root.iter("item"):
        title = (item.findtext("title") or "").strip()
        if not title:
            continue
        link = (item.findtext("link") or "").strip()
        pub = item.findtext("pubDate") or item.findtext("date") or ""
        try:
            published = parse_rfc3339(pub)
        except ValueError:
            published = fetched_at
        articles.append(
            RawArticle(
                external_id=link or title,
                source_id=source_id,
                url=link,
                title=title,
                body=(item.findtext("description") or "").strip(),
                published_at=min(published, fetched_at),
                fetched_at=fetched_at,
            )
        )
    return articles


def poll_feed(fetch_batch, ingestor: Ingestor, interval_s: float = 600.0, ticks: int | None = None, sleep=_time.sleep):
    """Poll a fetch callable on the standard ten-minute cadence.

    `fetch_batch()` returns the next list of RawArticle. Runs forever unless
    `ticks` bounds the number of polls (tests inject a fake `sleep`).
    """
    reports = []
    n = 0
    while ticks is None or n < ticks:
        reports.append(ingestor.ingest_batch(fetch_batch()))
        n += 1
        if ticks is not None and n >= ticks:
            break
        sleep(interval_s)
    return reports
