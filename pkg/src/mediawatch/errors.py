"""Exception types shared across the engine."""


class MediaWatchError(Exception):
    """Base class for engine errors."""


class TextTooShort(MediaWatchError):
    """Text below the minimum length for language identification."""


class UnknownSource(MediaWatchError):
    """Article references a source id absent from the registry."""


class EmptyVocabulary(MediaWatchError):
    """Document has no tokens left after stopword removal."""


class ClockRegression(MediaWatchError):
    """Window clock moved backwards."""


class IncompleteHistory(MediaWatchError):
    """Fewer days of counts than the statistic requires."""


class UnknownEntity(MediaWatchError):
    """Entity id is not present in the co-occurrence index."""


class DuplicateId(MediaWatchError):
    """Article id already committed to the store."""


class MalformedExpr(MediaWatchError):
    """Channel expression violates the schema (bad kind, empty list, depth)."""


class ConfigError(MediaWatchError):
    """Pipeline configuration invalid or references missing files."""


class CorpusParseError(MediaWatchError):
    """Corpus line failed to parse; carries the 1-based line number."""

    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class PortBindError(MediaWatchError):
    """Service could not bind the requested port."""
