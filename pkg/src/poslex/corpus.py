"""Tagged-corpus parsing, quarantine, and deduplication into lexicon entries.

Input is one token per line, ``surface<DELIM>tag``. Lines that cannot become
tokens are quarantined, never silently dropped, so that
``tokens + quarantined == data lines`` always holds.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass

from .errors import EncodingError
from .model import DEDUPED, LexiconEntry, TagSet, entry_id
from .normalize import normalize

REASON_UNKNOWN_TAG = "unknown_tag"
REASON_EMPTY_SURFACE = "empty_surface"
REASON_MALFORMED = "malformed_line"

_DELIM_CHARS = {"tab": "\t", "space": " "}


@dataclass(frozen=True)
class CorpusFormat:
    delimiter: str = "auto"  # "auto" | "tab" | "space" | a single literal character
    comment_prefix: str | None = "#"


@dataclass(frozen=True)
class CorpusToken:
    surface: str
    tag: str
    line_no: int


@dataclass(frozen=True)
class QuarantineRecord:
    line_no: int
    raw_line: str
    reason: str


def detect_delimiter(lines: list[str]) -> str:
    """Majority vote over the first 100 data lines; ties and no-evidence fall back to tab."""
    votes = Counter()
    for line in lines[:100]:
        if "\t" in line:
            votes["tab"] += 1
        elif " " in line:
            votes["space"] += 1
    if votes["space"] > votes["tab"]:
        return "space"
    return "tab"


def _delimiter_char(fmt: CorpusFormat, data_lines: list[str]) -> str:
    delim = fmt.delimiter
    if delim == "auto":
        delim = detect_delimiter(data_lines)
    if delim in _DELIM_CHARS:
        return _DELIM_CHARS[delim]
    if len(delim) == 1:
        return delim
    raise ValueError(f"invalid delimiter {delim!r}")


def parse_corpus(
    data: bytes, fmt: CorpusFormat, tagset: TagSet
) -> tuple[list[CorpusToken], list[QuarantineRecord]]:
    """Parse raw corpus bytes into tokens plus a quarantine list.

    Invalid UTF-8 is fatal (EncodingError); everything else that goes wrong on
    a line quarantines just that line. Token order follows input order.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EncodingError(f"corpus is not valid UTF-8: {exc}") from exc
    if text.startswith("﻿"):
        text = text[1:]

    numbered = []
    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        if fmt.comment_prefix and line.lstrip().startswith(fmt.comment_prefix):
            continue
        numbered.append((line_no, line))

    delim = _delimiter_char(fmt, [line for _, line in numbered])

    tokens: list[CorpusToken] = []
    quarantine: list[QuarantineRecord] = []
    for line_no, line in numbered:
        parts = line.rsplit(delim, 1)
        if len(parts) != 2:
            quarantine.append(QuarantineRecord(line_no, line, REASON_MALFORMED))
            continue
        surface, tag = parts[0].strip(), parts[1].strip()
        if not surface or not normalize(surface):
            quarantine.append(QuarantineRecord(line_no, line, REASON_EMPTY_SURFACE))
            continue
        if not tag or tag not in tagset:
            quarantine.append(QuarantineRecord(line_no, line, REASON_UNKNOWN_TAG))
            continue
        tokens.append(CorpusToken(surface=surface, tag=tag, line_no=line_no))
    return tokens, quarantine


def dedup(tokens: list[CorpusToken]) -> list[LexiconEntry]:
    """Collapse tokens into one entry per (normalized surface, tag) pair.

    Frequencies sum to the token count; output order is (tag, source_form)
    so identical input always yields identical bytes downstream.
    """
    counts: Counter[tuple[str, str]] = Counter()
    for token in tokens:
        counts[(token.tag, normalize(token.surface))] += 1
    entries = []
    for (tag, form), freq in sorted(counts.items()):
        entries.append(
            LexiconEntry(
                id=entry_id(form, tag),
                source_form=form,
                tag=tag,
                frequency=freq,
                state=DEDUPED,
            )
        )
    return entries


def entries_csv(entries: list[LexiconEntry]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "source_form", "tag", "frequency"])
    for e in entries:
        writer.writerow([e.id, e.source_form, e.tag, e.frequency])
    return buf.getvalue().encode("utf-8")


def quarantine_csv(records: list[QuarantineRecord]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["line_no", "reason", "raw_line"])
    for r in records:
        writer.writerow([r.line_no, r.reason, r.raw_line])
    return buf.getvalue().encode("utf-8")
