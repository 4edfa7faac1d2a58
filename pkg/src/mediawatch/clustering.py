"""Sliding-window document clustering, medoid titles, cross-lingual links
and day-to-day story chains.

One ClusterWindow instance owns the live clusters for one language. Each
tick re-vectorizes the window corpus (log-TF x IDF, L2-normalized),
re-partitions it with deterministic average-link agglomeration, and maps
the partition back onto the live clusters. Articles older than the window
stay attached to a surviving cluster but never seed a new one.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone

from .errors import ClockRegression
from .textutil import cosine, l2_normalize, tokenize

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.5
DEFAULT_WINDOW_HOURS = 4.0
BUCKET_SECONDS = 600
METADATA_LINK_THRESHOLD = 0.3
STORY_LOOKBACK_DAYS = 7
ENTITY_FEATURE_WEIGHT = 2.0
CATEGORY_FEATURE_WEIGHT = 1.0


@dataclass(frozen=True)
class ClusterDoc:
    """The slice of an enriched article the clustering layer needs."""

    article_id: str
    language: str
    title: str
    text: str
    published_at: datetime
    categories: frozenset[str] = frozenset()
    entity_ids: frozenset[int] = frozenset()


@dataclass(frozen=True)
class DocVector:
    article_id: str
    weights: dict[str, float]


@dataclass(frozen=True)
class Cluster:
    """Immutable snapshot of one live cluster at a bucket tick."""

    id: str
    language: str
    member_ids: tuple[str, ...]
    centroid: dict[str, float]
    medoid_id: str
    window_start: datetime
    window_end: datetime
    categories: dict[str, int]
    entities: dict[int, int]
    size_history: tuple[tuple[datetime, int], ...]

    @property
    def size(self) -> int:
        return len(self.member_ids)


def vectorize(docs: list[ClusterDoc], stopwords: frozenset[str] = frozenset()) -> list[DocVector]:
    """log-TF x IDF over the window corpus, L2-normalized.

    weight(t, d) = (1 + ln tf) * (ln(N / df) + 1). Documents reduced to
    nothing by the stopword list are excluded and logged.
    """
    token_lists: dict[str, list[str]] = {}
    for doc in docs:
        tokens = [t for t in tokenize(doc.text) if t not in stopwords]
        if not tokens:
            logger.info("article %s excluded from vector space: empty vocabulary", doc.article_id)
            continue
        token_lists[doc.article_id] = tokens
    n_docs = len(token_lists)
    df: dict[str, int] = {}
    for tokens in token_lists.values():
        for term in set(tokens):
            df[term] = df.get(term, 0) + 1
    vectors = []
    for article_id, tokens in token_lists.items():
        tf: dict[str, int] = {}
        for term in tokens:
            tf[term] = tf.get(term, 0) + 1
        weights = {
            term: (1.0 + math.log(count)) * (math.log(n_docs / df[term]) + 1.0)
            for term, count in tf.items()
        }
        vectors.append(DocVector(article_id=article_id, weights=l2_normalize(weights)))
    return vectors


def cluster_window(vectors: list[DocVector], threshold: float = DEFAULT_THRESHOLD) -> list[tuple[str, ...]]:
    """Average-link agglomerative partition of the window's vectors.

    Merging continues while the best inter-cluster average cosine is at or
    above the threshold. Ties merge the pair whose (smaller min article id,
    larger min article id) tuple sorts first, making the partition a pure
    function of the vector set.
    """
    ids = sorted(v.article_id for v in vectors)
    weights = {v.article_id: v.weights for v in vectors}
    if not ids:
        return []
    pair_cos: dict[tuple[str, str], float] = {}
    for i, a in enumerate(ids):
        for b in ids[i + 1 :]:
            pair_cos[(a, b)] = cosine(weights[a], weights[b])

    clusters: dict[int, list[str]] = {i: [a] for i, a in enumerate(ids)}
    cross: dict[tuple[int, int], float] = {}
    for i in clusters:
        for j in clusters:
            if i < j:
                cross[(i, j)] = pair_cos[(clusters[i][0], clusters[j][0])]
    next_key = len(ids)

    while True:
        best_key = None
        best_avg = threshold
        best_tie = None
        for (i, j), total in cross.items():
            avg = total / (len(clusters[i]) * len(clusters[j]))
            if avg < threshold:
                continue
            mins = sorted((clusters[i][0], clusters[j][0]))
            tie = (mins[0], mins[1])
            if avg > best_avg or (avg == best_avg and (best_tie is None or tie < best_tie)):
                best_key = (i, j)
                best_avg = avg
                best_tie = tie
        if best_key is None:
            break
        i, j = best_key
        merged = sorted(clusters[i] + clusters[j])
        k = next_key
        next_key += 1
        for other in list(clusters):
            if other in (i, j):
                continue
            a, b = (other, i) if other < i else (i, other)
            c, d = (other, j) if other < j else (j, other)
            cross[(min(other, k), max(other, k))] = cross.pop((a, b)) + cross.pop((c, d))
        cross.pop((i, j))
        del clusters[i]
        del clusters[j]
        clusters[k] = merged

    return sorted((tuple(members) for members in clusters.values()), key=lambda m: m[0])


def centroid_of(member_ids, vectors: dict[str, dict[str, float]]) -> dict[str, float]:
    """Mean of the members' unit vectors (not re-normalized)."""
    present = [vectors[m] for m in member_ids if m in vectors]
    if not present:
        return {}
    sums: dict[str, float] = {}
    for weights in present:
        for term, w in weights.items():
            sums[term] = sums.get(term, 0.0) + w
    n = len(present)
    return {term: w / n for term, w in sums.items()}


def select_medoid(
    member_ids,
    vectors: dict[str, dict[str, float]],
    published_at: dict[str, datetime],
) -> str:
    """Member closest to the centroid by cosine; ties break to the earliest
    published article, then the smallest id.

    Similarities are quantized to 12 decimals so mathematically tied
    members (where float summation order would otherwise pick a winner)
    actually fall through to the documented tie-break.
    """
    members = sorted(member_ids)
    if not members:
        raise ValueError("empty cluster")
    center = centroid_of(members, vectors)
    scored = []
    for member in members:
        sim = round(cosine(vectors.get(member, {}), center), 12)
        scored.append((-sim, published_at[member], member))
    scored.sort()
    return scored[0][2]


# -- metadata similarity (language-independent features only) --------------------

def metadata_vector(entity_ids, categories) -> dict[str, float]:
    features: dict[str, float] = {}
    for entity_id in set(entity_ids):
        features[f"e:{entity_id}"] = ENTITY_FEATURE_WEIGHT
    for category in set(categories):
        features[f"c:{category}"] = CATEGORY_FEATURE_WEIGHT
    return features


def metadata_cosine(cluster_a: "Cluster", cluster_b: "Cluster") -> float:
    return cosine(
        metadata_vector(cluster_a.entities, cluster_a.categories),
        metadata_vector(cluster_b.entities, cluster_b.categories),
    )


def link_cross_lingual(cluster_a: "Cluster", cluster_b: "Cluster", threshold: float = METADATA_LINK_THRESHOLD) -> bool:
    """Language-bridging link: entity/category feature cosine at or above
    the threshold. Caller guarantees different languages and overlapping
    calendar days."""
    return metadata_cosine(cluster_a, cluster_b) >= threshold


# -- sliding window state ----------------------------------------------------------

@dataclass
class _LiveCluster:
    id: str
    created_at: datetime
    member_ids: list[str] = field(default_factory=list)
    size_history: list[tuple[datetime, int]] = field(default_factory=list)


def bucket_floor(moment: datetime, bucket_seconds: int = BUCKET_SECONDS) -> datetime:
    epoch = int(moment.timestamp())
    return datetime.fromtimestamp(epoch - epoch % bucket_seconds, tz=timezone.utc)


class ClusterWindow:
    """Single-writer clustering state for one language.

    Readers take immutable snapshots; different languages run fully in
    parallel because they share nothing.
    """

    def __init__(
        self,
        language: str,
        window_hours: float = DEFAULT_WINDOW_HOURS,
        threshold: float = DEFAULT_THRESHOLD,
        bucket_seconds: int = BUCKET_SECONDS,
        stopwords: frozenset[str] = frozenset(),
    ):
        self.language = language
        self.window = timedelta(hours=window_hours)
        self.threshold = threshold
        self.bucket_seconds = bucket_seconds
        self.stopwords = stopwords
        self.clock: datetime | None = None
        self._docs: dict[str, ClusterDoc] = {}
        self._clusters: dict[str, _LiveCluster] = {}
        self._assignment: dict[str, str] = {}
        self._vectors: dict[str, dict[str, float]] = {}
        self._next_id = 1

    # -- tick ------------------------------------------------------------------

    def tick(self, now: datetime, new_docs: list[ClusterDoc] = ()) -> None:
        if self.clock is not None and now < self.clock:
            raise ClockRegression(f"{self.language}: clock moved from {self.clock} to {now}")
        self.clock = now
        for doc in new_docs:
            self._docs[doc.article_id] = doc

        horizon = now - self.window
        attached = {m for cluster in self._clusters.values() for m in cluster.member_ids}
        corpus_ids = {
            doc_id
            for doc_id, doc in self._docs.items()
            if doc.published_at >= horizon or doc_id in attached
        }
        # drop state for articles that are neither in-window nor attached
        for doc_id in list(self._docs):
            if doc_id not in corpus_ids:
                del self._docs[doc_id]

        vectors = vectorize([self._docs[i] for i in sorted(corpus_ids)], self.stopwords)
        self._vectors = {v.article_id: v.weights for v in vectors}
        partition = cluster_window(vectors, self.threshold)

        in_window = {i for i in corpus_ids if self._docs[i].published_at >= horizon}
        parts = [part for part in partition if any(m in in_window for m in part)]

        self._map_parts(parts, now)
        self._retire(horizon)
        self._append_history(now)

    def _map_parts(self, parts: list[tuple[str, ...]], now: datetime) -> None:
        overlaps = []
        for p_idx, part in enumerate(parts):
            part_set = set(part)
            for cluster_id, cluster in self._clusters.items():
                shared = len(part_set & set(cluster.member_ids))
                if shared:
                    overlaps.append((-shared, part[0], cluster_id, p_idx))
        overlaps.sort()
        part_to_cluster: dict[int, str] = {}
        taken: set[str] = set()
        for _, _, cluster_id, p_idx in overlaps:
            if p_idx in part_to_cluster or cluster_id in taken:
                continue
            part_to_cluster[p_idx] = cluster_id
            taken.add(cluster_id)

        for p_idx, part in enumerate(parts):
            free = [m for m in part if m not in self._assignment]
            if p_idx in part_to_cluster:
                cluster = self._clusters[part_to_cluster[p_idx]]
            else:
                if not free:
                    continue
                cluster = _LiveCluster(id=f"{self.language}-{self._next_id}", created_at=now)
                self._next_id += 1
                self._clusters[cluster.id] = cluster
            for member in free:
                cluster.member_ids.append(member)
                self._assignment[member] = cluster.id
            cluster.member_ids.sort(key=lambda m: (self._docs[m].published_at, m))

    def _retire(self, horizon: datetime) -> None:
        for cluster_id in sorted(self._clusters):
            cluster = self._clusters[cluster_id]
            if all(self._docs[m].published_at < horizon for m in cluster.member_ids):
                for member in cluster.member_ids:
                    self._assignment.pop(member, None)
                del self._clusters[cluster_id]

    def _append_history(self, now: datetime) -> None:
        bucket = bucket_floor(now, self.bucket_seconds)
        step = timedelta(seconds=self.bucket_seconds)
        for cluster in self._clusters.values():
            count = len(cluster.member_ids)
            if cluster.size_history and cluster.size_history[-1][0] == bucket:
                cluster.size_history[-1] = (bucket, count)
                continue
            # keep the 600 s spacing invariant across skipped ticks
            if cluster.size_history:
                last_bucket, last_count = cluster.size_history[-1]
                gap = last_bucket + step
                while gap < bucket:
                    cluster.size_history.append((gap, last_count))
                    gap += step
            cluster.size_history.append((bucket, count))

    # -- views -------------------------------------------------------------------

    def snapshot(self) -> dict[str, Cluster]:
        out = {}
        for cluster_id in sorted(self._clusters):
            out[cluster_id] = self._snapshot_one(self._clusters[cluster_id])
        return out

    def _snapshot_one(self, live: _LiveCluster) -> Cluster:
        members = list(live.member_ids)
        published = {m: self._docs[m].published_at for m in members}
        categories: dict[str, int] = {}
        entities: dict[int, int] = {}
        for member in members:
            doc = self._docs[member]
            for cat in doc.categories:
                categories[cat] = categories.get(cat, 0) + 1
            for entity_id in doc.entity_ids:
                entities[entity_id] = entities.get(entity_id, 0) + 1
        medoid = select_medoid(members, self._vectors, published)
        return Cluster(
            id=live.id,
            language=self.language,
            member_ids=tuple(members),
            centroid=centroid_of(members, self._vectors),
            medoid_id=medoid,
            window_start=min(published.values()),
            window_end=self.clock,
            categories=categories,
            entities=entities,
            size_history=tuple(live.size_history),
        )

    def top_stories(self, n: int = 10) -> list[Cluster]:
        """The n largest live clusters; ties go to the earlier window_start."""
        snapshot = self.snapshot().values()
        ordered = sorted(snapshot, key=lambda c: (-c.size, c.window_start, c.id))
        return ordered[:n]

    def doc_title(self, article_id: str) -> str:
        return self._docs[article_id].title

    def doc_published(self, article_id: str) -> datetime:
        return self._docs[article_id].published_at


# -- stories -----------------------------------------------------------------------

@dataclass
class Story:
    id: str
    language: str
    daily_cluster_ids: dict[date, str] = field(default_factory=dict)
    title_per_day: dict[date, str] = field(default_factory=dict)
    cross_links: set[tuple[str, str]] = field(default_factory=set)
    last_metadata: dict[str, float] = field(default_factory=dict)
    last_day: date | None = None
    daily_sizes: dict[date, int] = field(default_factory=dict)


class StoryIndex:
    """Day-scale chains of clusters about the same subject, per language."""

    def __init__(self, language: str, lookback_days: int = STORY_LOOKBACK_DAYS,
                 threshold: float = METADATA_LINK_THRESHOLD):
        self.language = language
        self.lookback = lookback_days
        self.threshold = threshold
        self.stories: dict[str, Story] = {}
        self._next_id = 1

    def attach(self, cluster: Cluster, day: date, medoid_title: str = "") -> str:
        """Attach a daily cluster to the best matching recent story or start
        a new one; exactly one story per cluster, one cluster per story-day."""
        features = metadata_vector(cluster.entities, cluster.categories)
        best_id = None
        best_sim = 0.0
        for story_id in sorted(self.stories):
            story = self.stories[story_id]
            if story.last_day is None or day in story.daily_cluster_ids:
                continue
            age = (day - story.last_day).days
            if age < 0 or age > self.lookback:
                continue
            sim = cosine(features, story.last_metadata)
            # ascending id iteration keeps the smallest story id on ties
            if sim >= self.threshold and sim > best_sim:
                best_id = story_id
                best_sim = sim
        if best_id is None:
            best_id = f"{self.language}-s{self._next_id}"
            self._next_id += 1
            self.stories[best_id] = Story(id=best_id, language=self.language)
        story = self.stories[best_id]
        story.daily_cluster_ids[day] = cluster.id
        story.title_per_day[day] = medoid_title
        story.daily_sizes[day] = cluster.size
        story.last_metadata = features
        story.last_day = day
        return best_id
