from __future__ import annotations

import random
from datetime import timedelta

import pytest

from mediawatch.errors import DuplicateId
from mediawatch.linguistic import Quote
from mediawatch.store import ArticleStore, make_snippet
from mediawatch.textutil import canonical_json, tokenize

from .conftest import T0, make_record

WORDS = ["storm", "coast", "rain", "flood", "vote", "tax", "budget", "health", "virus", "port"]


def random_corpus(n: int, seed: int = 11):
    rng = random.Random(seed)
    records = []
    for i in range(n):
        title = " ".join(rng.sample(WORDS, 3)).capitalize()
        body = " ".join(rng.choices(WORDS, k=60))
        records.append(
            make_record(
                f"r{i:04d}",
                T0 + timedelta(hours=rng.randrange(0, 24 * 30)),
                country=rng.choice(["US", "DE", "FR", "PL"]),
                categories=(rng.choice(["health", "energy", "sports"]),),
                language=rng.choice(["en", "de", "fr"]),
                title=title,
                body=body,
                tonality=rng.uniform(-1, 1),
            )
        )
    return records


class TestCommit:
    def test_long_body_capped_at_40_words(self, tmp_path):
        body = " ".join(f"word{i}" for i in range(500))
        record = make_record("a", T0, body=body)
        assert len(record.snippet.split()) <= 40
        assert record.snippet == " ".join(f"word{i}" for i in range(40))

    def test_round_trip_by_id(self, tmp_path):
        store = ArticleStore(tmp_path)
        record = make_record("a", T0, body="alpha beta gamma", categories=("health",), tonality=0.25)
        store.commit(record)
        assert store.get("a") == record

    def test_ten_commits_one_day_global_daily(self, tmp_path):
        store = ArticleStore(tmp_path)
        for i in range(10):
            store.commit(make_record(f"r{i}", T0 + timedelta(minutes=i)))
        # recount oracle
        assert store.cube.global_daily[T0.date()] == 10

    def test_duplicate_id_rejected(self, tmp_path):
        store = ArticleStore(tmp_path)
        store.commit(make_record("a", T0))
        with pytest.raises(DuplicateId):
            store.commit(make_record("a", T0))

    def test_snippet_cap_enforced_at_construction(self):
        with pytest.raises(ValueError):
            make_record("a", T0).__class__(
                **{**make_record("a", T0).__dict__, "snippet": " ".join(["x"] * 41)}
            )


class TestSearch:
    def test_single_title_match(self, tmp_path):
        store = ArticleStore(tmp_path)
        store.commit(make_record("a", T0, title="Flood hits the coast"))
        store.commit(make_record("b", T0, title="Budget vote delayed"))
        assert store.search("flood coast") == ["a"]

    def test_no_hits(self, tmp_path):
        store = ArticleStore(tmp_path)
        store.commit(make_record("a", T0, title="Flood hits the coast"))
        assert store.search("volcano") == []

    def test_matches_brute_force_scan(self, tmp_path):
        store = ArticleStore(tmp_path)
        records = random_corpus(20)
        for record in records:
            store.commit(record)
        rng = random.Random(3)
        for _ in range(25):
            query = " ".join(rng.sample(WORDS, 2))
            got = store.search(query)
            # oracle: independent linear scan with the same ranking rule
            terms = tokenize(query)
            expected = [
                r.id
                for r in sorted(records, key=lambda r: (-r.published_at.timestamp(), r.id))
                if all(t in tokenize(r.title + " " + r.snippet) for t in terms)
            ]
            assert got == expected

    def test_filters_are_intersections(self, tmp_path):
        store = ArticleStore(tmp_path)
        store.commit(make_record("a", T0, country="US", categories=("health",), language="en", title="Virus wave"))
        store.commit(make_record("b", T0, country="DE", categories=("health",), language="de", title="Virus wave"))
        assert store.search("virus", country="US") == ["a"]
        assert store.search("virus", language="de") == ["b"]
        assert store.search("virus", category="health", country="DE") == ["b"]
        assert store.search("virus", category="sports") == []

    def test_recency_ranking(self, tmp_path):
        store = ArticleStore(tmp_path)
        store.commit(make_record("old", T0, title="storm"))
        store.commit(make_record("new", T0 + timedelta(hours=2), title="storm"))
        assert store.search("storm") == ["new", "old"]


class TestCounts:
    def test_empty_store(self, tmp_path):
        assert ArticleStore(tmp_path).counts(group_by=("country",)) == []

    def test_single_article(self, tmp_path):
        store = ArticleStore(tmp_path)
        store.commit(make_record("a", T0, country="US", categories=("health",)))
        assert store.counts(group_by=("country",)) == [(("US",), 1)]

    def test_random_corpus_matches_recount(self, tmp_path):
        store = ArticleStore(tmp_path)
        records = random_corpus(200, seed=5)
        for record in records:
            store.commit(record)
        got = dict(store.counts(group_by=("country", "category")))
        # oracle: recount from the raw records
        expected: dict[tuple, int] = {}
        for record in records:
            for category in record.categories:
                key = (record.country_of_source, category)
                expected[key] = expected.get(key, 0) + 1
        assert got == expected

    def test_marginal_consistency_single_category_corpus(self, tmp_path):
        store = ArticleStore(tmp_path)
        for record in random_corpus(50, seed=9):
            store.commit(record)
        for day, total in store.cube.global_daily.items():
            assert store.cube.day_total(day) == total


class TestDurability:
    def test_reopened_store_answers_identically(self, tmp_path):
        store = ArticleStore(tmp_path)
        records = random_corpus(60, seed=21)
        for record in records:
            store.commit(record, quotes=[Quote(article_id=record.id, speaker_entity=None, text="Q")])
        queries = [("storm coast", None), ("vote", "en"), ("", "de")]
        before = [
            canonical_json(store.search(q, language=lang)) for q, lang in queries
        ] + [canonical_json([[list(map(str, k)), v] for k, v in store.counts(group_by=("day", "country"))])]
        reopened = ArticleStore(tmp_path)
        after = [
            canonical_json(reopened.search(q, language=lang)) for q, lang in queries
        ] + [canonical_json([[list(map(str, k)), v] for k, v in reopened.counts(group_by=("day", "country"))])]
        assert before == after
        assert len(reopened.quotes) == len(store.quotes)

    def test_purge_drops_old_records(self, tmp_path):
        store = ArticleStore(tmp_path)
        store.commit(make_record("old", T0 - timedelta(days=500)))
        store.commit(make_record("new", T0))
        dropped = store.purge(max_age_days=400, now=T0)
        assert dropped == 1
        assert store.get("old") is None
        assert ArticleStore(tmp_path).get("old") is None

    def test_no_body_words_beyond_snippet_in_segment(self, tmp_path):
        body = " ".join(f"unique{i}" for i in range(200))
        store = ArticleStore(tmp_path)
        store.commit(make_record("a", T0, body=body))
        raw = (tmp_path / "articles.jsonl").read_text(encoding="utf-8")
        assert "unique39" in raw
        assert "unique40" not in raw


class TestSnippet:
    def test_make_snippet_short_body(self):
        assert make_snippet("one two three") == "one two three"

    def test_make_snippet_cap(self):
        body = " ".join(str(i) for i in range(100))
        assert make_snippet(body).split() == [str(i) for i in range(40)]
