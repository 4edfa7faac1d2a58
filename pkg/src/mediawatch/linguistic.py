"""Per-article enrichment: category rules, dictionary entity recognition,
toponym disambiguation, direct-speech quotes and lexicon tonality.

All operations are pure functions over immutable rule/gazetteer snapshots,
so callers may run them from any number of threads; reloading data means
building a fresh index object and swapping it in.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .textutil import tokenize

FEATURE_CLASSES = ("capital", "city", "admin", "other")
_FEATURE_RANK = {name: rank for rank, name in enumerate(FEATURE_CLASSES)}

ENTITY_KINDS = ("person", "organization", "location")


# -- domain types --------------------------------------------------------------

@dataclass(frozen=True)
class CategoryRule:
    """Boolean keyword rule: all_of AND NOT none_of AND weighted any_of.

    Matches iff every all_of term occurs, no none_of term occurs, and the
    weight sum of occurring any_of terms reaches the threshold. An empty
    any_of with threshold 0 lets all_of alone decide.
    """

    category_id: str
    language: str = "*"
    all_of: tuple[str, ...] = ()
    any_of: tuple[tuple[str, int], ...] = ()
    none_of: tuple[str, ...] = ()
    threshold: int = 0

    def __post_init__(self):
        if self.threshold < 0:
            raise ValueError(f"rule {self.category_id!r}: negative threshold")
        for term, weight in self.any_of:
            if weight <= 0:
                raise ValueError(f"rule {self.category_id!r}: non-positive weight for {term!r}")


@dataclass(frozen=True)
class Entity:
    id: int
    kind: str
    canonical_name: str
    variants: tuple[tuple[str, str], ...] = ()  # (surface, language hint)
    titles: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ENTITY_KINDS:
            raise ValueError(f"entity {self.id}: kind {self.kind!r} not one of {ENTITY_KINDS}")
        surfaces = [v for v, _ in self.variants]
        if self.canonical_name not in surfaces:
            object.__setattr__(self, "variants", ((self.canonical_name, ""),) + tuple(self.variants))
            surfaces.insert(0, self.canonical_name)
        if len(set(surfaces)) != len(surfaces):
            raise ValueError(f"entity {self.id}: duplicate variant strings")

    @property
    def surface_forms(self) -> list[str]:
        return [v for v, _ in self.variants]


@dataclass(frozen=True)
class Toponym:
    name: str
    latitude: float
    longitude: float
    country: str
    population: int = 0
    feature_class: str = "other"
    variants: tuple[str, ...] = ()

    def __post_init__(self):
        if abs(self.latitude) > 90 or abs(self.longitude) > 180:
            raise ValueError(f"toponym {self.name!r}: coordinates out of range")
        if self.feature_class not in FEATURE_CLASSES:
            raise ValueError(f"toponym {self.name!r}: bad feature class {self.feature_class!r}")
        if self.population < 0:
            raise ValueError(f"toponym {self.name!r}: negative population")
        if self.name not in self.variants:
            object.__setattr__(self, "variants", (self.name,) + tuple(self.variants))


@dataclass(frozen=True)
class Mention:
    article_id: str
    entity_id: int
    surface: str
    char_offset: int
    resolved: bool = True

    @property
    def end(self) -> int:
        return self.char_offset + len(self.surface)


@dataclass(frozen=True)
class Quote:
    article_id: str
    speaker_entity: int | None
    text: str
    mentioned_entities: frozenset[int] = frozenset()


@dataclass(frozen=True)
class TonalityLexicon:
    language: str
    term_scores: dict[str, float]

    def __post_init__(self):
        for term, score in self.term_scores.items():
            if not -1.0 <= score <= 1.0:
                raise ValueError(f"lexicon {self.language}: score for {term!r} outside [-1,1]")


# -- categorization ------------------------------------------------------------

def _term_tokens(term: str) -> tuple[str, ...]:
    return tuple(tokenize(term))


def _occurs(term: str, tokens: list[str], token_set: set[str]) -> bool:
    phrase = _term_tokens(term)
    if not phrase:
        return False
    if len(phrase) == 1:
        return phrase[0] in token_set
    first = phrase[0]
    n = len(phrase)
    for i in range(len(tokens) - n + 1):
        if tokens[i] == first and tuple(tokens[i : i + n]) == phrase:
            return True
    return False


def rule_matches(rule: CategoryRule, tokens: list[str], token_set: set[str]) -> bool:
    for term in rule.all_of:
        if not _occurs(term, tokens, token_set):
            return False
    for term in rule.none_of:
        if _occurs(term, tokens, token_set):
            return False
    weight = sum(w for term, w in rule.any_of if _occurs(term, tokens, token_set))
    return weight >= rule.threshold


def categorize(text: str, rules: list[CategoryRule], language: str | None = None) -> set[str]:
    """Category ids of all rules matching the text (case-insensitive,
    whole-word). Rules bound to another language are skipped."""
    tokens = tokenize(text)
    token_set = set(tokens)
    matched = set()
    for rule in rules:
        if language is not None and rule.language not in ("*", language):
            continue
        if rule_matches(rule, tokens, token_set):
            matched.add(rule.category_id)
    return matched


def load_category_rules(path) -> list[CategoryRule]:
    """JSON array of CategoryRule objects."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    rules = []
    for obj in raw:
        rules.append(
            CategoryRule(
                category_id=str(obj["category_id"]),
                language=str(obj.get("language", "*")),
                all_of=tuple(str(t).casefold() for t in obj.get("all_of", [])),
                any_of=tuple((str(t).casefold(), int(w)) for t, w in obj.get("any_of", [])),
                none_of=tuple(str(t).casefold() for t in obj.get("none_of", [])),
                threshold=int(obj.get("threshold", 0)),
            )
        )
    return rules


# -- entity recognition ---------------------------------------------------------

class SurfaceMatcher:
    """Longest-match, non-overlapping surface matcher over raw text.

    One compiled alternation, longest alternative first, so the regex engine
    returns the longest surface at each position and finditer guarantees
    non-overlap. Lookup is casefolded.
    """

    def __init__(self, surface_to_key: dict[str, object]):
        self._by_folded: dict[str, object] = {}
        for surface, key in surface_to_key.items():
            folded = surface.casefold()
            prev = self._by_folded.get(folded)
            if prev is None or _stable_key(key) < _stable_key(prev):
                self._by_folded[folded] = key
        if self._by_folded:
            alternatives = sorted(self._by_folded, key=len, reverse=True)
            pattern = r"(?<!\w)(?:" + "|".join(re.escape(s) for s in alternatives) + r")(?!\w)"
            self._regex = re.compile(pattern, re.IGNORECASE | re.UNICODE)
        else:
            self._regex = None

    def finditer(self, text: str):
        if self._regex is None:
            return
        for match in self._regex.finditer(text):
            key = self._by_folded.get(match.group(0).casefold())
            if key is not None:
                yield match.start(), match.group(0), key


def _stable_key(key) -> tuple:
    # Entities key by id; toponym surfaces key by candidate tuples.
    return (0, key) if isinstance(key, int) else (1, str(key))


class EntityIndex:
    """Variant index over an entity gazetteer; conflicting variants resolve
    to the smallest entity id."""

    def __init__(self, entities: list[Entity]):
        self.by_id = {e.id: e for e in entities}
        surface_to_id: dict[str, int] = {}
        seen_folded: set[str] = set()
        for entity in sorted(entities, key=lambda e: e.id):
            for surface in entity.surface_forms:
                folded = surface.casefold()
                if folded not in seen_folded:
                    seen_folded.add(folded)
                    surface_to_id[surface] = entity.id
        self._matcher = SurfaceMatcher(surface_to_id)

    def kind_of(self, entity_id: int) -> str:
        return self.by_id[entity_id].kind

    def finditer(self, text: str):
        return self._matcher.finditer(text)


def recognize_entities(text: str, gazetteer: list[Entity] | EntityIndex, article_id: str = "") -> list[Mention]:
    """Longest-match, non-overlapping entity mentions, sorted by offset."""
    index = gazetteer if isinstance(gazetteer, EntityIndex) else EntityIndex(gazetteer)
    mentions = [
        Mention(article_id=article_id, entity_id=entity_id, surface=surface, char_offset=start)
        for start, surface, entity_id in index.finditer(text)
    ]
    return mentions


# -- toponym disambiguation -----------------------------------------------------

@dataclass(frozen=True)
class ResolvedPlace:
    surface: str
    char_offset: int
    toponym: Toponym

    @property
    def end(self) -> int:
        return self.char_offset + len(self.surface)


class ToponymIndex:
    def __init__(self, toponyms: list[Toponym]):
        self.toponyms = list(toponyms)
        by_surface: dict[str, list[Toponym]] = {}
        for toponym in toponyms:
            for surface in toponym.variants:
                by_surface.setdefault(surface.casefold(), []).append(toponym)
        self._by_surface = by_surface
        self._matcher = SurfaceMatcher({s: s for s in by_surface})

    def candidates(self, surface: str) -> list[Toponym]:
        return self._by_surface.get(surface.casefold(), [])

    def finditer(self, text: str):
        for start, surface, _ in self._matcher.finditer(text):
            yield start, surface


def _candidate_sort_key(toponym: Toponym) -> tuple:
    return (
        -toponym.population,
        _FEATURE_RANK[toponym.feature_class],
        toponym.country,
        toponym.name,
    )


def _window_bounds(text: str, start: int, end: int, n_tokens: int = 3) -> tuple[int, int]:
    """Character bounds covering n_tokens word tokens before and after a span."""
    spans = [m.span() for m in re.finditer(r"[^\W_]+", text, re.UNICODE)]
    before = [s for s in spans if s[1] <= start]
    after = [s for s in spans if s[0] >= end]
    lo = before[-n_tokens][0] if len(before) >= n_tokens else (before[0][0] if before else start)
    hi = after[n_tokens - 1][1] if len(after) >= n_tokens else (after[-1][1] if after else end)
    return lo, hi


def geotag(
    text: str,
    mentions: list[Mention],
    toponyms: list[Toponym] | ToponymIndex,
    source_country: str = "ZZ",
    entities_by_id: dict[int, Entity] | None = None,
) -> list[ResolvedPlace]:
    """Resolve place-name matches, suppressing person-internal homographs.

    Candidate precedence among homographs: explicit disambiguator inside a
    3-token window (another gazetteer place of the same country), then the
    source country, then population, then feature class
    (capital > city > admin > other), ties by country code then name.
    """
    index = toponyms if isinstance(toponyms, ToponymIndex) else ToponymIndex(toponyms)
    entities_by_id = entities_by_id or {}
    person_spans = [
        (m.char_offset, m.end)
        for m in mentions
        if entities_by_id.get(m.entity_id) is not None and entities_by_id[m.entity_id].kind == "person"
    ]
    resolved = []
    for start, surface in index.finditer(text):
        end = start + len(surface)
        if any(start >= p_start and end <= p_end for p_start, p_end in person_spans):
            continue
        candidates = index.candidates(surface)
        if not candidates:
            continue
        if len(candidates) == 1:
            resolved.append(ResolvedPlace(surface, start, candidates[0]))
            continue
        pick = _disambiguate(text, start, end, candidates, index, source_country)
        resolved.append(ResolvedPlace(surface, start, pick))
    return resolved


def _disambiguate(
    text: str,
    start: int,
    end: int,
    candidates: list[Toponym],
    index: ToponymIndex,
    source_country: str,
) -> Toponym:
    lo, hi = _window_bounds(text, start, end)
    window_countries: set[str] = set()
    for w_start, w_surface in index.finditer(text[lo:hi]):
        abs_start = lo + w_start
        abs_end = abs_start + len(w_surface)
        if abs_start < end and abs_end > start:
            continue  # the candidate span itself
        for hit in index.candidates(w_surface):
            window_countries.add(hit.country)

    by_window = [c for c in candidates if c.country in window_countries]
    if by_window:
        candidates = by_window
    elif source_country not in ("", "ZZ", None):
        by_source = [c for c in candidates if c.country == source_country]
        if by_source:
            candidates = by_source
    return min(candidates, key=_candidate_sort_key)


# -- quotations -----------------------------------------------------------------

QUOTE_MARK_PAIRS = (('"', '"'), ("“", "”"), ("«", "»"))

_ATTRIBUTION_GAP = 60  # max chars between a mention and its quote mark


@dataclass
class QuoteExtraction:
    quotes: list[Quote] = field(default_factory=list)
    unbalanced: int = 0


def _quote_spans(text: str) -> tuple[list[tuple[int, int, int, int]], int]:
    """(open_pos, inner_start, inner_end, close_end) spans plus unbalanced count."""
    spans = []
    unbalanced = 0
    for opener, closer in QUOTE_MARK_PAIRS:
        if opener == closer:
            positions = [m.start() for m in re.finditer(re.escape(opener), text)]
            for i in range(0, len(positions) - 1, 2):
                spans.append((positions[i], positions[i] + 1, positions[i + 1], positions[i + 1] + 1))
            if len(positions) % 2:
                unbalanced += 1
        else:
            opens = [m.start() for m in re.finditer(re.escape(opener), text)]
            closes = [m.start() for m in re.finditer(re.escape(closer), text)]
            ci = 0
            for o in opens:
                while ci < len(closes) and closes[ci] <= o:
                    unbalanced += 1  # closer with no preceding opener
                    ci += 1
                if ci == len(closes):
                    unbalanced += 1  # opener never closed
                    continue
                spans.append((o, o + 1, closes[ci], closes[ci] + 1))
                ci += 1
            unbalanced += len(closes) - ci
    spans.sort()
    # drop overlapping spans from mixed mark families, first wins
    kept = []
    last_end = -1
    for span in spans:
        if span[0] >= last_end:
            kept.append(span)
            last_end = span[3]
    return kept, unbalanced


def _normalize_gap(segment: str) -> str:
    return " ".join(segment.replace(":", " ").replace(",", " ").split()).casefold()


def _speaker_before(text: str, open_pos: int, mentions: list[Mention], verbs: frozenset[str]) -> int | None:
    """⟨Entity⟩ ⟨reporting-verb⟩ [:] before the opening mark."""
    best = None
    for mention in mentions:
        if mention.end > open_pos or open_pos - mention.end > _ATTRIBUTION_GAP:
            continue
        gap = _normalize_gap(text[mention.end : open_pos])
        if gap in verbs and (best is None or mention.end > best.end):
            best = mention
    return best.entity_id if best else None


def _speaker_after(text: str, close_end: int, mentions: list[Mention], verbs: frozenset[str]) -> int | None:
    """"…", ⟨reporting-verb⟩ ⟨Entity⟩ after the closing mark."""
    best = None
    for mention in mentions:
        if mention.char_offset < close_end or mention.char_offset - close_end > _ATTRIBUTION_GAP:
            continue
        gap = _normalize_gap(text[close_end : mention.char_offset])
        if gap in verbs and (best is None or mention.char_offset < best.char_offset):
            best = mention
    return best.entity_id if best else None


def extract_quotes(
    text: str,
    mentions: list[Mention],
    verbs: frozenset[str],
    article_id: str = "",
) -> QuoteExtraction:
    """Direct-speech quotes with speaker attribution and in-quote entities.

    Unbalanced marks skip the affected quote and are only counted in the
    extraction diagnostics.
    """
    result = QuoteExtraction()
    spans, unbalanced = _quote_spans(text)
    result.unbalanced = unbalanced
    for open_pos, inner_start, inner_end, close_end in spans:
        quote_text = text[inner_start:inner_end]
        if not quote_text.strip():
            continue
        speaker = _speaker_before(text, open_pos, mentions, verbs)
        if speaker is None:
            speaker = _speaker_after(text, close_end, mentions, verbs)
        inside = frozenset(
            m.entity_id
            for m in mentions
            if m.char_offset >= inner_start and m.end <= inner_end and m.entity_id != speaker
        )
        result.quotes.append(
            Quote(
                article_id=article_id,
                speaker_entity=speaker,
                text=quote_text,
                mentioned_entities=inside,
            )
        )
    return result


# -- tonality --------------------------------------------------------------------

NEGATION_WINDOW = 2


def tonality(text: str, lexicon: TonalityLexicon, negators: frozenset[str] = frozenset()) -> float:
    """Mean score of matched lexicon terms in [-1, 1], 0.0 with no match.

    A negator within two tokens before a matched term flips its sign.
    """
    tokens = tokenize(text)
    scores = []
    for i, token in enumerate(tokens):
        score = lexicon.term_scores.get(token)
        if score is None:
            continue
        window = tokens[max(0, i - NEGATION_WINDOW) : i]
        if any(tok in negators for tok in window):
            score = -score
        scores.append(score)
    if not scores:
        return 0.0
    return sum(scores) / len(scores)


# -- gazetteer files --------------------------------------------------------------

def load_entities(path) -> list[Entity]:
    """JSON Lines of Entity records."""
    entities = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            entities.append(
                Entity(
                    id=int(obj["id"]),
                    kind=str(obj["kind"]),
                    canonical_name=str(obj["canonical_name"]),
                    variants=tuple((str(v), str(h)) for v, h in obj.get("variants", [])),
                    titles=tuple(str(t) for t in obj.get("titles", [])),
                )
            )
    return entities


def load_toponyms(path) -> list[Toponym]:
    """JSON Lines of Toponym records."""
    toponyms = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            toponyms.append(
                Toponym(
                    name=str(obj["name"]),
                    latitude=float(obj["latitude"]),
                    longitude=float(obj["longitude"]),
                    country=str(obj["country"]),
                    population=int(obj.get("population", 0)),
                    feature_class=str(obj.get("feature_class", "other")),
                    variants=tuple(str(v) for v in obj.get("variants", [])),
                )
            )
    return toponyms


def load_tonality_lexicon(path, language: str) -> TonalityLexicon:
    """UTF-8 term<TAB>score file."""
    scores: dict[str, float] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            term, _, raw = line.partition("\t")
            scores[term.casefold()] = float(raw)
    return TonalityLexicon(language=language, term_scores=scores)
