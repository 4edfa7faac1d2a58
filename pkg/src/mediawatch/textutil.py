"""Shared text primitives: tokenization, n-grams, shingles, sparse cosine.

Tokenization is deliberately simple and language-agnostic (Unicode word
characters, casefolded, no stemming) so behaviour is predictable across
scripts. Everything downstream — category matching, vectorization,
deduplication, search — goes through the same tokenizer.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from collections.abc import Iterable, Mapping
from datetime import datetime, timezone

_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Casefolded Unicode word tokens; digits kept, underscores split."""
    return _WORD_RE.findall(text.casefold())


def char_ngrams(text: str, n_min: int = 1, n_max: int = 4) -> Counter:
    """Character n-gram counts over the casefolded text, n in [n_min, n_max].

    Whitespace runs collapse to a single space so formatting does not
    perturb the profile.
    """
    folded = " ".join(text.casefold().split())
    grams: Counter = Counter()
    length = len(folded)
    for n in range(n_min, n_max + 1):
        for i in range(length - n + 1):
            grams[folded[i : i + n]] += 1
    return grams


def word_shingles(tokens: list[str], k: int = 4) -> frozenset:
    """Set of contiguous k-token shingles; short texts yield one shingle."""
    if not tokens:
        return frozenset()
    if len(tokens) < k:
        return frozenset({tuple(tokens)})
    return frozenset(tuple(tokens[i : i + k]) for i in range(len(tokens) - k + 1))


def jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    inter = len(a & b)
    if inter == 0:
        return 0.0
    return inter / len(a | b)


def cosine(a: Mapping[str, float], b: Mapping[str, float]) -> float:
    """Cosine similarity of two sparse vectors given as term->weight maps."""
    if not a or not b:
        return 0.0
    if len(b) < len(a):
        a, b = b, a
    dot = sum(w * b[t] for t, w in a.items() if t in b)
    if dot == 0.0:
        return 0.0
    norm_a = math.sqrt(sum(w * w for w in a.values()))
    norm_b = math.sqrt(sum(w * w for w in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (norm_a * norm_b)


def l2_normalize(weights: Mapping[str, float]) -> dict[str, float]:
    norm = math.sqrt(sum(w * w for w in weights.values()))
    if norm == 0.0:
        return dict(weights)
    return {t: w / norm for t, w in weights.items()}


def contains_phrase(tokens: list[str], phrase: tuple[str, ...]) -> bool:
    """Whole-word containment of a token phrase inside a token sequence."""
    if not phrase:
        return False
    n = len(phrase)
    if n == 1:
        return phrase[0] in tokens
    first = phrase[0]
    for i, tok in enumerate(tokens[: len(tokens) - n + 1]):
        if tok == first and tuple(tokens[i : i + n]) == phrase:
            return True
    return False


def parse_rfc3339(value: str) -> datetime:
    """Parse an RFC 3339 timestamp to an aware UTC datetime."""
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def rfc3339(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def canonical_json(obj: object) -> str:
    """Stable JSON used wherever CLI and API answers must be byte-identical."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def iter_jsonl(path) -> Iterable[tuple[int, dict]]:
    """Yield (1-based line number, parsed object) for each non-blank line."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            yield lineno, json.loads(line)
