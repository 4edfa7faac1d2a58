"""Entity co-occurrence analytics: related/associated rankings, ego graphs
with common-neighbor flags, the who-quotes-whom digraph and distribution
reports.

Co-occurrence is counted at cluster granularity: two entities co-occur
once per cluster that mentions both. The associated-entities weighting
pair(p,e)^2 / (count(p) * count(e)) is scale-free in the counts, which is
what pushes ubiquitous media VIPs down the list relative to exclusive
partners.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .errors import UnknownEntity
from .linguistic import Entity, Quote

DEFAULT_TOP_N = 100


@dataclass
class CooccurrenceIndex:
    pair_counts: dict[tuple[int, int], int] = field(default_factory=dict)
    entity_counts: dict[int, int] = field(default_factory=dict)

    def update(self, cluster_entity_sets) -> None:
        """Feed cluster memberships: each item is the set of entity ids
        mentioned by one cluster."""
        for raw in cluster_entity_sets:
            members = sorted(set(raw))
            for entity_id in members:
                self.entity_counts[entity_id] = self.entity_counts.get(entity_id, 0) + 1
            for i, a in enumerate(members):
                for b in members[i + 1 :]:
                    key = (a, b)
                    self.pair_counts[key] = self.pair_counts.get(key, 0) + 1

    def pair(self, a: int, b: int) -> int:
        key = (a, b) if a < b else (b, a)
        return self.pair_counts.get(key, 0)

    def neighbors(self, entity_id: int):
        for (a, b), count in self.pair_counts.items():
            if a == entity_id:
                yield b, count
            elif b == entity_id:
                yield a, count


def build_cooccurrence(cluster_entity_sets) -> CooccurrenceIndex:
    index = CooccurrenceIndex()
    index.update(cluster_entity_sets)
    return index


def related_entities(entity_id: int, index: CooccurrenceIndex, n: int = DEFAULT_TOP_N) -> list[tuple[int, int]]:
    """Raw co-occurrence ranking: top-n by pair count, ties by entity id."""
    if entity_id not in index.entity_counts:
        raise UnknownEntity(str(entity_id))
    ranked = sorted(index.neighbors(entity_id), key=lambda item: (-item[1], item[0]))
    return ranked[:n]


def association_score(index: CooccurrenceIndex, p: int, e: int) -> float:
    pair = index.pair(p, e)
    denominator = index.entity_counts[p] * index.entity_counts[e]
    return (pair * pair) / denominator


def associated_entities(entity_id: int, index: CooccurrenceIndex, n: int = DEFAULT_TOP_N) -> list[tuple[int, float]]:
    """Exclusivity-weighted ranking; score in (0, 1], 1 only for mutually
    exclusive pairs. Ties by pair count, then entity id."""
    if entity_id not in index.entity_counts:
        raise UnknownEntity(str(entity_id))
    scored = [
        (other, association_score(index, entity_id, other), count)
        for other, count in index.neighbors(entity_id)
    ]
    scored.sort(key=lambda item: (-item[1], -item[2], item[0]))
    return [(other, score) for other, score, _ in scored[:n]]


@dataclass
class EgoGraph:
    nodes: list[dict]
    links: list[dict]
    skipped_seeds: list[int]

    def to_json(self) -> dict:
        return {"nodes": self.nodes, "links": self.links}


def ego_graph(
    seeds: list[int],
    index: CooccurrenceIndex,
    n: int = DEFAULT_TOP_N,
    entities_by_id: dict[int, Entity] | None = None,
) -> EgoGraph:
    """Union of each seed's top-n associated entities; a node is flagged
    common when it is adjacent to at least two seeds. Unknown seeds are
    skipped and reported, not fatal."""
    entities_by_id = entities_by_id or {}
    known_seeds = []
    skipped = []
    for seed in seeds:
        if seed in index.entity_counts:
            known_seeds.append(seed)
        else:
            skipped.append(seed)
    links = []
    adjacency: dict[int, set[int]] = {}
    node_weight: dict[int, float] = {}
    for seed in sorted(set(known_seeds)):
        for other, score in associated_entities(seed, index, n):
            links.append({"source": seed, "target": other, "weight": index.pair(seed, other)})
            adjacency.setdefault(other, set()).add(seed)
            node_weight[other] = node_weight.get(other, 0.0) + score
    node_ids = sorted(set(known_seeds) | set(adjacency))
    ranked = sorted(
        (nid for nid in node_ids if nid not in set(known_seeds)),
        key=lambda nid: (-node_weight.get(nid, 0.0), nid),
    )
    rank_of = {nid: i + 1 for i, nid in enumerate(ranked)}

    def label(nid: int) -> str:
        entity = entities_by_id.get(nid)
        return entity.canonical_name if entity else str(nid)

    nodes = [
        {
            "id": nid,
            "label": label(nid),
            "common": len(adjacency.get(nid, ())) >= 2,
            "rank": rank_of.get(nid, 0),
            "seed": nid in set(known_seeds),
        }
        for nid in node_ids
    ]
    return EgoGraph(nodes=nodes, links=links, skipped_seeds=skipped)


@dataclass
class QuoteGraph:
    nodes: list[dict]
    links: list[dict]

    def to_json(self) -> dict:
        return {"nodes": self.nodes, "links": self.links}


def quote_graph(quotes: list[Quote], entities_by_id: dict[int, Entity] | None = None) -> QuoteGraph:
    """Digraph of who mentions whom in direct speech; rank 1 is the highest
    weighted in-degree so renderers can place those nodes centrally."""
    entities_by_id = entities_by_id or {}
    edge_counts: Counter = Counter()
    for quote in quotes:
        if quote.speaker_entity is None:
            continue
        for mentioned in quote.mentioned_entities:
            if mentioned != quote.speaker_entity:
                edge_counts[(quote.speaker_entity, mentioned)] += 1
    in_degree: Counter = Counter()
    node_ids = set()
    for (speaker, mentioned), count in edge_counts.items():
        node_ids.update((speaker, mentioned))
        in_degree[mentioned] += count
    ranked = sorted(node_ids, key=lambda nid: (-in_degree.get(nid, 0), nid))
    rank_of = {nid: i + 1 for i, nid in enumerate(ranked)}

    def label(nid: int) -> str:
        entity = entities_by_id.get(nid)
        return entity.canonical_name if entity else str(nid)

    nodes = [
        {
            "id": nid,
            "label": label(nid),
            "common": False,
            "rank": rank_of[nid],
            "in_degree": in_degree.get(nid, 0),
        }
        for nid in sorted(node_ids)
    ]
    links = [
        {"source": speaker, "target": mentioned, "weight": count}
        for (speaker, mentioned), count in sorted(edge_counts.items())
    ]
    return QuoteGraph(nodes=nodes, links=links)


# -- distribution reports ----------------------------------------------------------

DIMENSIONS = ("language", "country", "category", "source_kind")


def _bucket_counts(records, dimension: str, source_kinds: dict[str, str] | None) -> Counter:
    counts: Counter = Counter()
    for record in records:
        if dimension == "language":
            counts[record.language] += 1
        elif dimension == "country":
            counts[record.country_of_source] += 1
        elif dimension == "category":
            for category in record.categories:
                counts[category] += 1
        elif dimension == "source_kind":
            kind = (source_kinds or {}).get(record.source_id, "unknown")
            counts[kind] += 1
    return counts


def distribution_report(records, dimension: str, source_kinds: dict[str, str] | None = None) -> list[dict]:
    """Counts and normalized shares over one dimension; the category
    dimension counts per (article, category) assignment, so shares always
    sum to 1 over what was counted."""
    if dimension not in DIMENSIONS:
        raise ValueError(f"unknown dimension {dimension!r}")
    counts = _bucket_counts(records, dimension, source_kinds)
    total = sum(counts.values())
    if total == 0:
        return []
    rows = [
        {"bucket": bucket, "count": count, "share": count / total}
        for bucket, count in counts.items()
    ]
    rows.sort(key=lambda r: (-r["count"], r["bucket"]))
    return rows


def distribution_comparison(
    records_a,
    records_b,
    dimension: str,
    source_kinds: dict[str, str] | None = None,
) -> list[dict]:
    """Two share vectors side by side over the union of buckets."""
    report_a = {r["bucket"]: r for r in distribution_report(records_a, dimension, source_kinds)}
    report_b = {r["bucket"]: r for r in distribution_report(records_b, dimension, source_kinds)}
    buckets = sorted(set(report_a) | set(report_b))
    rows = []
    for bucket in buckets:
        a = report_a.get(bucket, {"count": 0, "share": 0.0})
        b = report_b.get(bucket, {"count": 0, "share": 0.0})
        rows.append(
            {
                "bucket": bucket,
                "count_a": a["count"],
                "share_a": a["share"],
                "count_b": b["count"],
                "share_b": b["share"],
            }
        )
    rows.sort(key=lambda r: (-(r["share_a"] + r["share_b"]), r["bucket"]))
    return rows
