"""Access to the bundled per-language seed data (profiles, stopwords,
reporting verbs, negators, tonality lexicons).

Everything here is replaceable via pipeline config paths; the bundled files
only guarantee a working out-of-the-box en/de/fr setup.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources


def _data_dir():
    return resources.files("mediawatch") / "data"


def _read_text(relpath: str) -> str:
    return (_data_dir() / relpath).read_text(encoding="utf-8")


def _available(subdir: str, suffix: str) -> list[str]:
    folder = _data_dir() / subdir
    return sorted(
        p.name[: -len(suffix)]
        for p in folder.iterdir()
        if p.name.endswith(suffix)
    )


@lru_cache(maxsize=None)
def seed_text(language: str) -> str:
    return _read_text(f"lang/{language}.txt")


def seed_languages() -> list[str]:
    return _available("lang", ".txt")


@lru_cache(maxsize=None)
def stopwords(language: str) -> frozenset[str]:
    try:
        text = _read_text(f"stopwords/{language}.txt")
    except FileNotFoundError:
        return frozenset()
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


@lru_cache(maxsize=None)
def reporting_verbs(language: str) -> frozenset[str]:
    try:
        text = _read_text(f"verbs/{language}.txt")
    except FileNotFoundError:
        return frozenset()
    return frozenset(line.strip().casefold() for line in text.splitlines() if line.strip())


@lru_cache(maxsize=None)
def negators(language: str) -> frozenset[str]:
    try:
        text = _read_text(f"negators/{language}.txt")
    except FileNotFoundError:
        return frozenset()
    return frozenset(line.strip().casefold() for line in text.splitlines() if line.strip())


@lru_cache(maxsize=None)
def tonality_terms(language: str) -> dict[str, float]:
    """term<TAB>score lines; scores clamped to [-1, 1]."""
    try:
        text = _read_text(f"tonality/{language}.tsv")
    except FileNotFoundError:
        return {}
    scores: dict[str, float] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        term, _, raw = line.partition("\t")
        score = max(-1.0, min(1.0, float(raw)))
        scores[term.casefold()] = score
    return scores
