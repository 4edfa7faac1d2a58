from __future__ import annotations

import json

import pytest

from mediawatch.errors import ConfigError, CorpusParseError
from mediawatch.pipeline import PipelineConfig, run_pipeline
from mediawatch.store import ArticleStore

from .scenario import write_scenario


@pytest.fixture(scope="module")
def scenario(tmp_path_factory):
    root = tmp_path_factory.mktemp("scenario")
    paths = write_scenario(root)
    config = PipelineConfig.from_file(paths["config"])
    report = run_pipeline(paths["corpus"], config, paths["store"])
    return {"paths": paths, "config": config, "report": report, "store": ArticleStore(paths["store"])}


class TestRunPipeline:
    def test_stage_counts_match_corpus_construction(self, scenario):
        report = scenario["report"]
        # generator ground truth: 11 rows, 1 unknown source, 1 near-duplicate
        assert report.parsed == 11
        assert report.unknown_sources == 1
        assert report.duplicates == 1
        assert report.accepted == 9
        assert report.committed == 9
        assert report.languages == {"en": 7, "de": 2}
        assert set(report.stage_ms) == {"parse", "ingest", "enrich", "cluster", "stories", "store"}

    def test_enrichment_lands_in_store(self, scenario):
        store = scenario["store"]
        flood = store.get("en-flood-1")
        assert flood.categories == frozenset({"flooding"})
        assert flood.language == "en"
        assert flood.country_of_source == "DE"
        assert any(ref.name == "Berlin" for ref in flood.toponym_refs)
        quote_rec = store.get("en-quote")
        assert 1 in quote_rec.entity_ids and 2 in quote_rec.entity_ids

    def test_quotes_extracted_and_stored(self, scenario):
        store = scenario["store"]
        quotes = [q for q in store.quotes if q.article_id == "en-quote"]
        assert len(quotes) == 1
        assert quotes[0].speaker_entity == 1
        assert 2 in quotes[0].mentioned_entities

    def test_day_two_clusters_are_live(self, scenario):
        store = scenario["store"]
        window_rows = [r for r in store.clusters.values() if r["kind"] == "window"]
        # 4h window: only day-two articles can still be live
        live_members = {m for row in window_rows for m in row["member_ids"]}
        assert live_members == {"en-flood-3", "en-flood-4", "en-flu"}
        flood_row = next(r for r in window_rows if "en-flood-3" in r["member_ids"])
        assert set(flood_row["member_ids"]) == {"en-flood-3", "en-flood-4"}
        assert flood_row["medoid_title"]

    def test_flood_story_spans_both_days(self, scenario):
        store = scenario["store"]
        flood_stories = [
            s
            for s in store.stories.values()
            if any("flood" in info["title"].lower() for info in s["days"].values())
        ]
        assert len(flood_stories) == 1
        story = flood_stories[0]
        assert set(story["days"]) == {"2015-05-04", "2015-05-05"}
        sizes = [info["size"] for info in story["days"].values()]
        assert sorted(sizes) == [2, 2]

    def test_cross_lingual_story_link(self, scenario):
        store = scenario["store"]
        # the de grippe story and the en flu article share Merkel + health
        de_stories = [s for s in store.stories.values() if s["language"] == "de"]
        assert de_stories
        linked = [s for s in de_stories if s["cross_links"]]
        assert linked, "expected at least one cross-lingual story link"
        languages = {lang for s in linked for lang, _ in s["cross_links"]}
        assert "en" in languages

    def test_cluster_ids_assigned_only_to_live_members(self, scenario):
        store = scenario["store"]
        for record in store.records.values():
            if record.id in {"en-flood-3", "en-flood-4", "en-flu"}:
                assert record.cluster_id is not None
            else:
                assert record.cluster_id is None

    def test_determinism_byte_identical_outputs(self, tmp_path):
        paths = write_scenario(tmp_path)
        config = PipelineConfig.from_file(paths["config"])
        run_pipeline(paths["corpus"], config, tmp_path / "s1")
        run_pipeline(paths["corpus"], config, tmp_path / "s2")
        for name in ("articles.jsonl", "clusters.jsonl", "stories.jsonl", "quotes.jsonl"):
            a = (tmp_path / "s1" / name).read_bytes()
            b = (tmp_path / "s2" / name).read_bytes()
            assert a == b, f"{name} differs between identical runs"

    def test_empty_corpus(self, tmp_path):
        paths = write_scenario(tmp_path)
        (tmp_path / "empty.jsonl").write_text("", encoding="utf-8")
        config = PipelineConfig.from_file(paths["config"])
        report = run_pipeline(tmp_path / "empty.jsonl", config, tmp_path / "empty-store")
        assert report.parsed == 0
        assert report.committed == 0

    def test_ingest_only_mode_skips_clustering(self, tmp_path):
        paths = write_scenario(tmp_path)
        config = PipelineConfig.from_file(paths["config"])
        report = run_pipeline(paths["corpus"], config, tmp_path / "ingest-store", with_clustering=False)
        assert report.committed == 9
        assert report.live_clusters == 0
        store = ArticleStore(tmp_path / "ingest-store")
        assert all(r.cluster_id is None for r in store.records.values())


class TestConfig:
    def test_missing_sources_rejected(self, tmp_path):
        (tmp_path / "c.json").write_text(json.dumps({"clustering_threshold": 0.5}), encoding="utf-8")
        with pytest.raises(ConfigError):
            PipelineConfig.from_file(tmp_path / "c.json")

    def test_bad_threshold_rejected(self, tmp_path):
        paths = write_scenario(tmp_path)
        raw = json.loads(paths["config"].read_text(encoding="utf-8"))
        raw["clustering_threshold"] = 1.7
        (tmp_path / "bad.json").write_text(json.dumps(raw), encoding="utf-8")
        with pytest.raises(ConfigError):
            PipelineConfig.from_file(tmp_path / "bad.json")

    def test_missing_referenced_file_rejected(self, tmp_path):
        paths = write_scenario(tmp_path)
        raw = json.loads(paths["config"].read_text(encoding="utf-8"))
        raw["entities"] = "no-such.jsonl"
        (tmp_path / "bad.json").write_text(json.dumps(raw), encoding="utf-8")
        with pytest.raises(ConfigError):
            PipelineConfig.from_file(tmp_path / "bad.json")

    def test_corpus_parse_error_carries_line(self, tmp_path):
        paths = write_scenario(tmp_path)
        config = PipelineConfig.from_file(paths["config"])
        lines = paths["corpus"].read_text(encoding="utf-8").splitlines()
        lines.insert(3, "{not json")
        (tmp_path / "broken.jsonl").write_text("\n".join(lines), encoding="utf-8")
        with pytest.raises(CorpusParseError) as err:
            run_pipeline(tmp_path / "broken.jsonl", config, tmp_path / "broken-store")
        assert err.value.lineno == 4
