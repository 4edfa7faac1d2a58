"""Channels: declarative filters over article metadata with union and
intersection algebra, channel sets, and the client-side notification
scheduler.

A channel expression evaluates against a store snapshot only, so the same
snapshot and expression always give the same article list. There is no
negation leaf: the algebra stays monotone and cheap to verify against a
linear scan.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from datetime import datetime, time, timedelta

from .errors import MalformedExpr
from .store import ArticleStore
from .textutil import tokenize

LEAF_KINDS = (
    "category",
    "top_stories",
    "country_source",
    "country_about",
    "entity",
    "language",
    "search",
)
COMPOSITE_KINDS = ("union", "intersection")
MAX_DEPTH = 8
TOP_STORIES_N = 10


@dataclass(frozen=True)
class ChannelExpr:
    kind: str
    value: str | int | None = None
    children: tuple["ChannelExpr", ...] = ()

    def validate(self, depth: int = 1) -> None:
        if depth > MAX_DEPTH:
            raise MalformedExpr(f"nesting depth exceeds {MAX_DEPTH}")
        if self.kind in COMPOSITE_KINDS:
            if not self.children:
                raise MalformedExpr(f"{self.kind} requires a non-empty child list")
            for child in self.children:
                child.validate(depth + 1)
            return
        if self.kind not in LEAF_KINDS:
            raise MalformedExpr(f"unknown kind {self.kind!r}")
        if self.children:
            raise MalformedExpr(f"leaf {self.kind!r} cannot have children")
        if self.kind == "entity":
            if not isinstance(self.value, int):
                raise MalformedExpr("entity leaf needs an integer id")
        elif not isinstance(self.value, str) or not self.value:
            raise MalformedExpr(f"leaf {self.kind!r} needs a non-empty string value")

    def to_json(self) -> dict:
        if self.kind in COMPOSITE_KINDS:
            return {"kind": self.kind, "children": [c.to_json() for c in self.children]}
        return {"kind": self.kind, "value": self.value}

    @classmethod
    def from_json(cls, obj) -> "ChannelExpr":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise MalformedExpr("expression must be an object with a 'kind'")
        kind = obj["kind"]
        if kind in COMPOSITE_KINDS:
            children = obj.get("children", [])
            if not isinstance(children, list):
                raise MalformedExpr("'children' must be a list")
            expr = cls(kind=kind, children=tuple(cls.from_json(c) for c in children))
        else:
            expr = cls(kind=kind, value=obj.get("value"))
        expr.validate()
        return expr


def union(*children: ChannelExpr) -> ChannelExpr:
    return ChannelExpr(kind="union", children=tuple(children))


def intersection(*children: ChannelExpr) -> ChannelExpr:
    return ChannelExpr(kind="intersection", children=tuple(children))


def leaf(kind: str, value) -> ChannelExpr:
    expr = ChannelExpr(kind=kind, value=value)
    expr.validate()
    return expr


# -- evaluation ---------------------------------------------------------------------

def top_story_members(store: ArticleStore, language: str, n: int = TOP_STORIES_N) -> set[str]:
    """Members of the n largest live clusters of a language, computed from
    the stored cluster assignments; ties rank the cluster whose earliest
    member published first."""
    groups: dict[str, list] = {}
    for record in store.records.values():
        if record.cluster_id and record.language == language:
            groups.setdefault(record.cluster_id, []).append(record)
    ranked = sorted(
        groups.items(),
        key=lambda item: (
            -len(item[1]),
            min(r.published_at for r in item[1]),
            item[0],
        ),
    )
    members: set[str] = set()
    for _cluster_id, records in ranked[:n]:
        members.update(r.id for r in records)
    return members


def _leaf_ids(expr: ChannelExpr, store: ArticleStore) -> set[str]:
    kind, value = expr.kind, expr.value
    if kind == "top_stories":
        return top_story_members(store, value)
    if kind == "search":
        terms = tokenize(value)
        ids = set()
        for record in store.records.values():
            record_tokens = set(tokenize(record.title + " " + record.snippet))
            if all(t in record_tokens for t in terms):
                ids.add(record.id)
        return ids
    out = set()
    for record in store.records.values():
        if kind == "category" and value in record.categories:
            out.add(record.id)
        elif kind == "language" and record.language == value:
            out.add(record.id)
        elif kind == "country_source" and record.country_of_source == value:
            out.add(record.id)
        elif kind == "country_about" and any(ref.country == value for ref in record.toponym_refs):
            out.add(record.id)
        elif kind == "entity" and value in record.entity_ids:
            out.add(record.id)
    return out


def _result_ids(expr: ChannelExpr, store: ArticleStore) -> set[str]:
    if expr.kind == "union":
        out: set[str] = set()
        for child in expr.children:
            out |= _result_ids(child, store)
        return out
    if expr.kind == "intersection":
        sets = [_result_ids(child, store) for child in expr.children]
        out = sets[0]
        for s in sets[1:]:
            out &= s
        return out
    return _leaf_ids(expr, store)


def evaluate(expr: ChannelExpr, store: ArticleStore) -> list[str]:
    """Article ids in the channel, newest first (ties by id)."""
    expr.validate()
    ids = _result_ids(expr, store)
    records = [store.records[i] for i in ids]
    records.sort(key=lambda r: (-r.published_at.timestamp(), r.id))
    return [r.id for r in records]


def channel_metadata(
    expr: ChannelExpr,
    store: ArticleStore,
    top_n: int = 10,
    source_kinds: dict[str, str] | None = None,
) -> dict:
    """Facet summary computed only over the channel's result set."""
    ids = evaluate(expr, store)
    records = [store.records[i] for i in ids]

    def hist(counter: dict) -> list[dict]:
        total = sum(counter.values())
        rows = [
            {"bucket": bucket, "count": count, "share": count / total}
            for bucket, count in counter.items()
        ]
        rows.sort(key=lambda r: (-r["count"], str(r["bucket"])))
        return rows[:top_n]

    categories: dict[str, int] = {}
    entities: dict[int, int] = {}
    source_countries: dict[str, int] = {}
    about_countries: dict[str, int] = {}
    for record in records:
        for category in record.categories:
            categories[category] = categories.get(category, 0) + 1
        for entity_id in record.entity_ids:
            entities[entity_id] = entities.get(entity_id, 0) + 1
        source_countries[record.country_of_source] = source_countries.get(record.country_of_source, 0) + 1
        for ref in record.toponym_refs:
            about_countries[ref.country] = about_countries.get(ref.country, 0) + 1
    return {
        "article_count": len(records),
        "categories": hist(categories),
        "entities": hist(entities),
        "source_countries": hist(source_countries),
        "about_countries": hist(about_countries),
    }


# -- channel sets ---------------------------------------------------------------------

@dataclass
class ChannelSet:
    name: str
    channels: list[tuple[str, ChannelExpr]] = field(default_factory=list)

    def add(self, name: str, expr: ChannelExpr) -> None:
        if any(existing == name for existing, _ in self.channels):
            raise ValueError(f"channel name {name!r} already in set {self.name!r}")
        expr.validate()
        self.channels.append((name, expr))

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "channels": [{"name": n, "expr": e.to_json()} for n, e in self.channels],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ChannelSet":
        out = cls(name=obj["name"])
        for row in obj.get("channels", []):
            out.add(row["name"], ChannelExpr.from_json(row["expr"]))
        return out


def save_channel_sets(directory, profile: str, sets: list[ChannelSet]) -> None:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(os.fspath(directory), f"{profile}.channels.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([s.to_json() for s in sets], fh, ensure_ascii=False, indent=2, sort_keys=True)


def load_channel_sets(directory, profile: str) -> list[ChannelSet]:
    path = os.path.join(os.fspath(directory), f"{profile}.channels.json")
    if not os.path.exists(path):
        return []
    with open(path, "r", encoding="utf-8") as fh:
        return [ChannelSet.from_json(obj) for obj in json.load(fh)]


# -- notifications ----------------------------------------------------------------------

@dataclass(frozen=True)
class NotificationPolicy:
    threshold: int = 1
    quiet_start: time | None = None
    quiet_end: time | None = None
    session_delay: timedelta = timedelta(seconds=120)

    def __post_init__(self):
        if self.threshold < 1:
            raise ValueError("threshold must be >= 1")
        if (self.quiet_start is None) != (self.quiet_end is None):
            raise ValueError("quiet hours need both start and end")


@dataclass(frozen=True)
class UserState:
    session_started_at: datetime | None = None


@dataclass(frozen=True)
class Decision:
    kind: str  # "none" | "deliver_now" | "defer_until"
    at: datetime | None = None


def _in_quiet_hours(policy: NotificationPolicy, clock: datetime) -> bool:
    if policy.quiet_start is None:
        return False
    now = clock.time()
    start, end = policy.quiet_start, policy.quiet_end
    if start <= end:
        return start <= now < end
    return now >= start or now < end  # range crosses midnight

def _quiet_hours_end(policy: NotificationPolicy, clock: datetime) -> datetime:
    end = clock.replace(
        hour=policy.quiet_end.hour,
        minute=policy.quiet_end.minute,
        second=policy.quiet_end.second,
        microsecond=0,
    )
    if end <= clock:
        end += timedelta(days=1)
    return end


def notification_due(
    policy: NotificationPolicy,
    delta_count: int,
    state: UserState,
    clock: datetime,
) -> Decision:
    """Client-side notification decision from fetched delta counts alone.

    Below-threshold deltas are silent; quiet hours defer to their end; a
    freshly started session defers to start + session_delay; otherwise the
    notification goes out immediately.
    """
    if delta_count < policy.threshold:
        return Decision(kind="none")
    if _in_quiet_hours(policy, clock):
        return Decision(kind="defer_until", at=_quiet_hours_end(policy, clock))
    if state.session_started_at is not None:
        ready_at = state.session_started_at + policy.session_delay
        if clock < ready_at:
            return Decision(kind="defer_until", at=ready_at)
    return Decision(kind="deliver_now")


class NotificationScheduler:
    """Per-user coalescing wrapper: repeated triggers while a deferred
    delivery is pending collapse into that one pending decision."""

    def __init__(self, policy: NotificationPolicy):
        self.policy = policy
        self.pending: datetime | None = None

    def on_delta(self, delta_count: int, state: UserState, clock: datetime) -> Decision:
        if self.pending is not None and clock >= self.pending:
            self.pending = None  # pending delivery has fired
        decision = notification_due(self.policy, delta_count, state, clock)
        if decision.kind == "defer_until":
            if self.pending is not None and decision.at >= self.pending:
                return Decision(kind="none")  # coalesced into the pending one
            self.pending = decision.at
        return decision
