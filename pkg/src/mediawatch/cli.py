"""Batch CLI: corpus runs, reports and exports against a store directory.

All JSON output is canonical (sorted keys, compact separators) so answers
are directly comparable with the HTTP API's after canonical
re-serialization.
"""

from __future__ import annotations

import csv
import io
import json

import click

from .api import AppState, alerts_payload, default_clock, entity_payload, serve as serve_app, top_stories_payload
from .channels import ChannelExpr, channel_metadata, evaluate
from .errors import MediaWatchError
from .exports import map_placemarks, to_geojson, to_kml, validate_geojson, validate_kml
from .graphs import distribution_comparison, distribution_report, ego_graph, quote_graph
from .pipeline import PipelineConfig, run_pipeline
from .textutil import canonical_json, parse_rfc3339

ALERT_CSV_COLUMNS = ("country", "category", "observed", "expected", "score", "level")


def _echo_json(obj) -> None:
    click.echo(canonical_json(obj))


def _state(ctx) -> AppState:
    config = PipelineConfig.from_file(ctx.obj["config"]) if ctx.obj.get("config") else None
    return AppState.load(ctx.obj["store"], config=config)


@click.group()
@click.option("--config", type=click.Path(), default=None, help="Pipeline config JSON.")
@click.option("--store", type=click.Path(), default="./store", help="Store directory.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "kml"]), default="json")
@click.pass_context
def main(ctx, config, store, fmt):
    """Desk-scale media monitoring engine."""
    ctx.ensure_object(dict)
    ctx.obj.update(config=config, store=store, format=fmt)


@main.command()
@click.argument("corpus", type=click.Path(exists=True))
@click.pass_context
def ingest(ctx, corpus):
    """Ingest a corpus: dedup + enrichment + store, without clustering."""
    config = PipelineConfig.from_file(ctx.obj["config"])
    report = run_pipeline(corpus, config, ctx.obj["store"], with_clustering=False)
    _echo_json(report.to_json())


@main.command()
@click.argument("corpus", type=click.Path(exists=True))
@click.pass_context
def run(ctx, corpus):
    """Run the full pipeline over a corpus."""
    config = PipelineConfig.from_file(ctx.obj["config"])
    report = run_pipeline(corpus, config, ctx.obj["store"])
    _echo_json(report.to_json())


@main.command()
@click.option("--clock", default=None, help="RFC 3339 board clock; defaults to the day after the newest article.")
@click.pass_context
def alerts(ctx, clock):
    """Ranked country x category alert board."""
    state = _state(ctx)
    moment = parse_rfc3339(clock) if clock else default_clock(state.store)
    payload = alerts_payload(state, moment)
    if ctx.obj["format"] == "csv":
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(ALERT_CSV_COLUMNS)
        for cell in payload["cells"]:
            writer.writerow([cell[c] for c in ALERT_CSV_COLUMNS])
        click.echo(out.getvalue(), nl=False)
        return
    _echo_json(payload)


@main.command()
@click.option("--lang", required=True)
@click.option("--n", default=10, show_default=True)
@click.pass_context
def top(ctx, lang, n):
    """Top live clusters for a language with their size histories."""
    _echo_json(top_stories_payload(_state(ctx), lang, n))


@main.command()
@click.argument("entity_id", type=int)
@click.pass_context
def entity(ctx, entity_id):
    """Entity page data: variants, related/associated lists, quotes."""
    try:
        _echo_json(entity_payload(_state(ctx), entity_id))
    except KeyError:
        raise click.ClickException(f"unknown entity {entity_id}")


@main.command()
@click.argument("kind", type=click.Choice(["ego", "quotes"]))
@click.option("--entity", "entities", type=int, multiple=True, help="Seed entity id (repeatable).")
@click.option("--n", default=100, show_default=True)
@click.pass_context
def graph(ctx, kind, entities, n):
    """Node-link graph exports (ego network or quotation digraph)."""
    state = _state(ctx)
    if kind == "ego":
        if not entities:
            raise click.ClickException("ego graph needs at least one --entity")
        result = ego_graph(list(entities), state.cooccurrence, n=n, entities_by_id=state.entities_by_id)
        _echo_json({**result.to_json(), "skipped_seeds": result.skipped_seeds})
    else:
        _echo_json(quote_graph(state.store.quotes, entities_by_id=state.entities_by_id).to_json())


@main.command("channel-eval")
@click.option("--expr", required=True, help="Channel expression JSON, or @path to a JSON file.")
@click.option("--limit", default=50, show_default=True)
@click.pass_context
def channel_eval(ctx, expr, limit):
    """Evaluate a channel expression against the store."""
    raw = open(expr[1:], "r", encoding="utf-8").read() if expr.startswith("@") else expr
    try:
        channel = ChannelExpr.from_json(json.loads(raw))
    except (json.JSONDecodeError, MediaWatchError) as exc:
        raise click.ClickException(str(exc))
    state = _state(ctx)
    ids = evaluate(channel, state.store)
    _echo_json(
        {
            "expr": channel.to_json(),
            "total": len(ids),
            "ids": ids[:limit],
            "facets": channel_metadata(channel, state.store, source_kinds=state.source_kinds),
        }
    )


@main.command("export-map")
@click.option("--out", type=click.Path(), default=None, help="Write to a file instead of stdout.")
@click.pass_context
def export_map(ctx, out):
    """KML (with --format kml) or GeoJSON placemark export of live clusters."""
    state = _state(ctx)
    placemarks = map_placemarks(state.store)
    if ctx.obj["format"] == "kml":
        text = to_kml(placemarks)
        validate_kml(text)
    else:
        obj = to_geojson(placemarks)
        validate_geojson(obj)
        text = canonical_json(obj)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text)


@main.command("report-distribution")
@click.option("--dimension", required=True, type=click.Choice(["language", "country", "category", "source_kind"]))
@click.option("--expr", default=None, help="Optional channel filter JSON.")
@click.option("--compare", default=None, help="Second channel filter JSON for a share comparison.")
@click.pass_context
def report_distribution(ctx, dimension, expr, compare):
    """Counts and shares over a metadata dimension."""
    state = _state(ctx)

    def records_for(raw):
        if raw is None:
            return list(state.store.records.values())
        channel = ChannelExpr.from_json(json.loads(raw))
        return [state.store.records[i] for i in evaluate(channel, state.store)]

    if compare is not None:
        rows = distribution_comparison(records_for(expr), records_for(compare), dimension, state.source_kinds)
    else:
        rows = distribution_report(records_for(expr), dimension, state.source_kinds)
    _echo_json({"dimension": dimension, "rows": rows})


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8600, show_default=True)
@click.pass_context
def serve(ctx, host, port):
    """Serve the read-only HTTP API over the store."""
    serve_app(_state(ctx), host=host, port=port)


if __name__ == "__main__":
    main()
