from __future__ import annotations

import math
import random
from datetime import date, timedelta

import pytest

from mediawatch.clustering import (
    Cluster,
    ClusterDoc,
    ClusterWindow,
    StoryIndex,
    cluster_window,
    link_cross_lingual,
    select_medoid,
    vectorize,
)
from mediawatch.errors import ClockRegression

from .conftest import T0


def doc(article_id: str, text: str, minutes: float = 0.0, language: str = "en", **meta) -> ClusterDoc:
    return ClusterDoc(
        article_id=article_id,
        language=language,
        title=f"Title {article_id}",
        text=text,
        published_at=T0 + timedelta(minutes=minutes),
        categories=frozenset(meta.get("categories", ())),
        entity_ids=frozenset(meta.get("entity_ids", ())),
    )


def cluster_stub(entities=(), categories=(), cid="c", language="en") -> Cluster:
    return Cluster(
        id=cid,
        language=language,
        member_ids=("a",),
        centroid={},
        medoid_id="a",
        window_start=T0,
        window_end=T0,
        categories={c: 1 for c in categories},
        entities={e: 1 for e in entities},
        size_history=((T0, 1),),
    )


# -- independent oracle helpers ---------------------------------------------------

def oracle_cosine(a: dict, b: dict) -> float:
    dot = sum(v * b.get(k, 0.0) for k, v in a.items())
    na = math.sqrt(sum(v * v for v in a.values()))
    nb = math.sqrt(sum(v * v for v in b.values()))
    return dot / (na * nb) if na and nb else 0.0


def oracle_tfidf(token_docs: dict[str, list[str]]) -> dict[str, dict[str, float]]:
    n = len(token_docs)
    df: dict[str, int] = {}
    for tokens in token_docs.values():
        for term in set(tokens):
            df[term] = df.get(term, 0) + 1
    out = {}
    for doc_id, tokens in token_docs.items():
        weights = {}
        for term in set(tokens):
            tf = tokens.count(term)
            weights[term] = (1 + math.log(tf)) * (math.log(n / df[term]) + 1)
        norm = math.sqrt(sum(w * w for w in weights.values()))
        out[doc_id] = {t: w / norm for t, w in weights.items()}
    return out


def oracle_all_merge_orders(vectors: dict[str, dict[str, float]], threshold: float) -> set[frozenset]:
    """Every final partition reachable by any legal average-link merge order."""

    def avg(members_a, members_b):
        sims = [oracle_cosine(vectors[x], vectors[y]) for x in members_a for y in members_b]
        return sum(sims) / len(sims)

    results: set[frozenset] = set()
    seen: set[frozenset] = set()

    def explore(partition: frozenset):
        if partition in seen:
            return
        seen.add(partition)
        parts = sorted(partition, key=lambda p: sorted(p))
        mergeable = []
        for i, a in enumerate(parts):
            for b in parts[i + 1 :]:
                if avg(a, b) >= threshold:
                    mergeable.append((a, b))
        if not mergeable:
            results.add(partition)
            return
        for a, b in mergeable:
            merged = (partition - {a, b}) | {a | b}
            explore(merged)

    explore(frozenset(frozenset({i}) for i in vectors))
    return results


# -- vectorize ---------------------------------------------------------------------

class TestVectorize:
    def test_single_document_idf_uniform(self):
        vectors = vectorize([doc("a", "storm storm coast rain")])
        weights = vectors[0].weights
        # N=1, df=1 for every term: idf = ln(1)+1 = 1, so weights ~ 1+ln(tf)
        expected = {"storm": 1 + math.log(2), "coast": 1.0, "rain": 1.0}
        norm = math.sqrt(sum(w * w for w in expected.values()))
        for term, raw in expected.items():
            assert weights[term] == pytest.approx(raw / norm)

    def test_identical_documents_identical_vectors(self):
        vectors = vectorize([doc("a", "storm coast rain"), doc("b", "storm coast rain")])
        assert oracle_cosine(vectors[0].weights, vectors[1].weights) == pytest.approx(1.0)

    def test_hand_built_docs_match_oracle(self):
        texts = {
            "d1": "storm coast rain",
            "d2": "storm coast wind",
            "d3": "storm flood flood",
            "d4": "vote tax budget",
            "d5": "vote tax tax",
        }
        vectors = {v.article_id: v.weights for v in vectorize([doc(i, t) for i, t in texts.items()])}
        expected = oracle_tfidf({i: t.split() for i, t in texts.items()})
        assert set(vectors) == set(expected)
        for doc_id, weights in expected.items():
            assert set(vectors[doc_id]) == set(weights)
            for term, w in weights.items():
                assert vectors[doc_id][term] == pytest.approx(w, abs=1e-12)

    def test_unit_norm_invariant(self):
        vectors = vectorize([doc("a", "alpha beta beta gamma gamma gamma"), doc("b", "alpha delta")])
        for vector in vectors:
            norm = math.sqrt(sum(w * w for w in vector.weights.values()))
            assert abs(norm - 1.0) <= 1e-9

    def test_all_stopwords_excluded(self):
        stop = frozenset({"the", "of"})
        vectors = vectorize([doc("a", "the of the"), doc("b", "storm coast")], stopwords=stop)
        assert [v.article_id for v in vectors] == ["b"]


# -- cluster_window -----------------------------------------------------------------

TOPIC_A = {
    "a1": "storm coast rain flood",
    "a2": "storm coast rain wind",
    "a3": "storm coast flood wind",
}
TOPIC_B = {
    "b1": "vote tax budget minister",
    "b2": "vote tax budget debate",
    "b3": "vote tax minister debate",
}


class TestClusterWindow:
    def test_identical_docs_merge(self):
        vectors = vectorize([doc("a", "storm coast rain"), doc("b", "storm coast rain")])
        assert cluster_window(vectors, threshold=0.5) == [("a", "b")]

    def test_orthogonal_docs_stay_apart(self):
        vectors = vectorize([doc("a", "storm coast rain"), doc("b", "vote tax budget")])
        assert cluster_window(vectors, threshold=0.5) == [("a",), ("b",)]

    def test_two_topic_set_matches_all_merge_orders(self):
        texts = {**TOPIC_A, **TOPIC_B}
        vectors = vectorize([doc(i, t) for i, t in texts.items()])
        got = cluster_window(vectors, threshold=0.5)
        weights = {v.article_id: v.weights for v in vectors}
        final_states = oracle_all_merge_orders(weights, 0.5)
        # every legal merge order ends in the same two-topic partition
        assert len(final_states) == 1
        expected = {frozenset(TOPIC_A), frozenset(TOPIC_B)}
        assert next(iter(final_states)) == frozenset(expected)
        assert {frozenset(part) for part in got} == expected

    def test_permutation_invariance(self):
        texts = {**TOPIC_A, **TOPIC_B}
        docs = [doc(i, t) for i, t in texts.items()]
        rng = random.Random(7)
        baseline = cluster_window(vectorize(docs), threshold=0.5)
        for _ in range(20):
            shuffled = docs[:]
            rng.shuffle(shuffled)
            assert cluster_window(vectorize(shuffled), threshold=0.5) == baseline

    def test_empty_input(self):
        assert cluster_window([], threshold=0.5) == []


# -- medoid -----------------------------------------------------------------------

def oracle_brute_force_medoid(member_ids, vectors, published):
    """argmin of summed cosine distances to all members (centroid-free)."""
    best = None
    for candidate in sorted(member_ids):
        total = sum(1 - oracle_cosine(vectors.get(candidate, {}), vectors.get(other, {})) for other in member_ids)
        key = (total, published[candidate], candidate)
        if best is None or key < best[0]:
            best = (key, candidate)
    return best[1]


class TestSelectMedoid:
    def test_singleton(self):
        vectors = {v.article_id: v.weights for v in vectorize([doc("a", "storm coast")])}
        assert select_medoid(["a"], vectors, {"a": T0}) == "a"

    def test_identical_docs_tie_breaks_to_earlier(self):
        docs = [doc("b", "storm coast rain", minutes=5), doc("a", "storm coast rain", minutes=9)]
        vectors = {v.article_id: v.weights for v in vectorize(docs)}
        published = {d.article_id: d.published_at for d in docs}
        assert select_medoid(["a", "b"], vectors, published) == "b"

    def test_seven_doc_cluster_matches_brute_force(self):
        texts = {
            "m1": "storm coast rain flood wind",
            "m2": "storm coast rain flood damage",
            "m3": "storm coast rain wind damage",
            "m4": "storm coast flood wind damage",
            "m5": "storm rain flood wind damage",
            "m6": "coast rain flood wind damage",
            "m7": "storm coast rain flood wind damage",
        }
        docs = [doc(i, t, minutes=k) for k, (i, t) in enumerate(sorted(texts.items()))]
        vectors = {v.article_id: v.weights for v in vectorize(docs)}
        published = {d.article_id: d.published_at for d in docs}
        expected = oracle_brute_force_medoid(list(texts), vectors, published)
        assert select_medoid(list(texts), vectors, published) == expected


# -- sliding window -----------------------------------------------------------------

class TestSlidingWindow:
    def test_stale_cluster_retired(self):
        window = ClusterWindow("en", window_hours=4.0)
        window.tick(T0, [doc("a", "storm coast rain flood")])
        assert len(window.snapshot()) == 1
        window.tick(T0 + timedelta(hours=5))
        assert window.snapshot() == {}

    def test_new_matching_article_retains_old_members(self):
        window = ClusterWindow("en", window_hours=4.0)
        window.tick(T0, [doc("a", "storm coast rain flood")])
        window.tick(T0 + timedelta(hours=5), [doc("b", "storm coast rain flood", minutes=300)])
        snapshot = window.snapshot()
        assert len(snapshot) == 1
        cluster = next(iter(snapshot.values()))
        assert set(cluster.member_ids) == {"a", "b"}

    def test_empty_tick_appends_history(self):
        window = ClusterWindow("en")
        window.tick(T0, [doc("a", "storm coast rain")])
        window.tick(T0 + timedelta(seconds=600), [])
        cluster = next(iter(window.snapshot().values()))
        assert len(cluster.size_history) == 2
        assert cluster.size_history[0][1] == cluster.size_history[1][1] == 1

    def test_history_bucket_spacing_is_600s(self):
        window = ClusterWindow("en")
        window.tick(T0, [doc("a", "storm coast rain")])
        window.tick(T0 + timedelta(seconds=1800), [])
        cluster = next(iter(window.snapshot().values()))
        stamps = [b for b, _ in cluster.size_history]
        for earlier, later in zip(stamps, stamps[1:]):
            assert (later - earlier).total_seconds() == 600

    def test_clock_regression_rejected(self):
        window = ClusterWindow("en")
        window.tick(T0, [doc("a", "storm coast rain")])
        with pytest.raises(ClockRegression):
            window.tick(T0 - timedelta(seconds=1))

    def test_article_in_at_most_one_cluster(self):
        window = ClusterWindow("en")
        docs = [doc(i, t, minutes=k) for k, (i, t) in enumerate({**TOPIC_A, **TOPIC_B}.items())]
        window.tick(T0 + timedelta(minutes=10), docs)
        seen: set[str] = set()
        for cluster in window.snapshot().values():
            for member in cluster.member_ids:
                assert member not in seen
                seen.add(member)

    def test_top_stories_order_and_replay_histories(self):
        window = ClusterWindow("en", window_hours=4.0)
        # stage: topic A gets 3 articles over two ticks, topic B gets 2, C gets 1
        window.tick(T0, [doc("a1", TOPIC_A["a1"]), doc("b1", TOPIC_B["b1"])])
        window.tick(
            T0 + timedelta(seconds=600),
            [doc("a2", TOPIC_A["a2"], minutes=10), doc("b2", TOPIC_B["b2"], minutes=10)],
        )
        window.tick(
            T0 + timedelta(seconds=1200),
            [doc("a3", TOPIC_A["a3"], minutes=20), doc("c1", "markets opened higher today", minutes=20)],
        )
        top = window.top_stories(n=10)
        sizes = [c.size for c in top]
        assert sizes == [3, 2, 1]
        by_members = {frozenset(c.member_ids): c for c in top}
        a_history = [count for _, count in by_members[frozenset({"a1", "a2", "a3"})].size_history]
        b_history = [count for _, count in by_members[frozenset({"b1", "b2"})].size_history]
        # replay oracle: staged arrivals fix the per-bucket counts exactly
        assert a_history == [1, 2, 3]
        assert b_history == [1, 2, 2]

    def test_top_stories_fewer_than_n(self):
        window = ClusterWindow("en")
        window.tick(T0, [doc("a", "storm coast rain")])
        assert len(window.top_stories(n=10)) == 1


# -- cross-lingual links --------------------------------------------------------------

class TestCrossLingualLink:
    def test_identical_metadata_links(self):
        a = cluster_stub(entities=[1, 2, 3], categories=["x"], language="en")
        b = cluster_stub(entities=[1, 2, 3], categories=["x"], language="de")
        assert link_cross_lingual(a, b)

    def test_disjoint_metadata_does_not_link(self):
        a = cluster_stub(entities=[1, 2], categories=["x"], language="en")
        b = cluster_stub(entities=[3, 4], categories=["y"], language="de")
        assert not link_cross_lingual(a, b)

    def test_three_of_six_shared_entities_one_category(self):
        # arithmetic oracle: dot = 3*2*2 + 1*1 = 13, each norm = sqrt(6*4+1) = 5
        shared = [1, 2, 3]
        a = cluster_stub(entities=shared + [4, 5, 6], categories=["x"], language="en")
        b = cluster_stub(entities=shared + [7, 8, 9], categories=["x"], language="fr")
        expected = 13 / 25
        assert expected >= 0.3
        assert link_cross_lingual(a, b)

    def test_one_of_six_shared_no_category(self):
        # arithmetic oracle: dot = 4, norms = sqrt(24) -> cos = 1/6 < 0.3
        a = cluster_stub(entities=[1, 2, 3, 4, 5, 6], language="en")
        b = cluster_stub(entities=[1, 7, 8, 9, 10, 11], language="fr")
        assert 4 / 24 < 0.3
        assert not link_cross_lingual(a, b)


# -- stories ------------------------------------------------------------------------

class TestStories:
    def test_first_cluster_starts_new_story(self):
        stories = StoryIndex("en")
        sid = stories.attach(cluster_stub(entities=[1, 2], categories=["x"]), date(2015, 5, 4), "t")
        assert sid in stories.stories

    def test_identical_metadata_joins_yesterdays_story(self):
        stories = StoryIndex("en")
        c = cluster_stub(entities=[1, 2], categories=["x"])
        sid1 = stories.attach(c, date(2015, 5, 4), "day one")
        sid2 = stories.attach(c, date(2015, 5, 5), "day two")
        assert sid1 == sid2
        assert len(stories.stories[sid1].daily_cluster_ids) == 2

    def test_higher_cosine_story_wins(self):
        stories = StoryIndex("en")
        base_a = cluster_stub(categories=["c1", "c2", "c3", "x1", "x2"])
        base_b = cluster_stub(categories=["c1", "c2", "y1", "y2", "y3"])
        day1 = date(2015, 5, 4)
        sid_a = stories.attach(base_a, day1, "a")
        sid_b = stories.attach(base_b, day1, "b")
        assert sid_a != sid_b  # same-day exclusion forces a second story
        newcomer = cluster_stub(categories=["c1", "c2", "c3", "c4", "c5"])
        # arithmetic oracle: cos vs A = 3/5 = 0.6, vs B = 2/5 = 0.4
        sid = stories.attach(newcomer, date(2015, 5, 5), "n")
        assert sid == sid_a

    def test_lookback_limit(self):
        stories = StoryIndex("en", lookback_days=7)
        c = cluster_stub(entities=[1], categories=["x"])
        sid1 = stories.attach(c, date(2015, 5, 4), "t")
        sid2 = stories.attach(c, date(2015, 5, 20), "t")
        assert sid1 != sid2

    def test_story_size_conservation(self):
        stories = StoryIndex("en")
        sizes = []
        day = date(2015, 5, 4)
        for offset in range(3):
            members = tuple(f"a{offset}{i}" for i in range(offset + 1))
            cluster = Cluster(
                id=f"c{offset}",
                language="en",
                member_ids=members,
                centroid={},
                medoid_id=members[0],
                window_start=T0,
                window_end=T0,
                categories={"x": 1},
                entities={1: 1},
                size_history=(),
            )
            sizes.append(cluster.size)
            stories.attach(cluster, day + timedelta(days=offset), "t")
        story = next(iter(stories.stories.values()))
        assert sum(story.daily_sizes.values()) == sum(sizes)
