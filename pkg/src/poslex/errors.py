"""Exception hierarchy shared by all pipeline stages."""

from __future__ import annotations


class PoslexError(Exception):
    """Base class for all domain errors raised by this package."""


class IllegalTransition(PoslexError):
    """An event was applied to an entry whose state does not admit it."""


class UnknownEntry(PoslexError):
    """An event referenced an entry id that is not in the project."""


class NotArTagged(PoslexError):
    """AR flagging attempted on an entry whose tag is not AR."""


class NothingToStrip(PoslexError):
    """A pronoun strip edit was requested but no strippable pronoun is present."""


class StageError(PoslexError):
    """A pipeline stage was invoked out of order or on an unready project."""


class ConflictError(PoslexError):
    """An optimistic write lost the race against a concurrent commit."""


class EncodingError(PoslexError):
    """Corpus input is not valid UTF-8."""


class MalformedCsv(PoslexError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class CorruptJournal(PoslexError):
    def __init__(self, last_good: int, message: str):
        super().__init__(f"{message} (last good seq: {last_good})")
        self.last_good = last_good


class BackendUnavailable(PoslexError):
    """The translation backend kept failing after all retries were spent."""


class EmptyDistribution(PoslexError):
    """A tag distribution was requested over zero nonzero counts."""


class EmptyLexicon(PoslexError):
    """Lexicon export was requested but no entry has an accurate verdict."""
