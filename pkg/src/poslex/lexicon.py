"""Final lexicon export: the accurate entries, in three formats."""

from __future__ import annotations

import csv
import io
import json

from .errors import EmptyLexicon
from .model import REVIEWED_ACCURATE, LexiconEntry

LICENSE_ID = "CC-BY-NC-SA-4.0"


def _accurate_rows(entries: list[LexiconEntry]) -> list[LexiconEntry]:
    rows = [e for e in entries if e.state == REVIEWED_ACCURATE and e.translation]
    if not rows:
        raise EmptyLexicon("no accurate entries to export")
    rows.sort(key=lambda e: (e.tag, e.translation, e.source_form))
    return rows


def _header_lines(tool_version: str, generated_at: str) -> list[str]:
    return [
        f"# license: {LICENSE_ID}",
        f"# generator: poslex {tool_version}",
        f"# generated_at: {generated_at}",
    ]


def lexicon_tsv(entries: list[LexiconEntry], tool_version: str, generated_at: str) -> bytes:
    lines = _header_lines(tool_version, generated_at)
    for e in _accurate_rows(entries):
        lines.append(f"{e.translation}\t{e.tag}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def lexicon_csv(entries: list[LexiconEntry], tool_version: str, generated_at: str) -> bytes:
    rows = _accurate_rows(entries)
    buf = io.StringIO()
    for line in _header_lines(tool_version, generated_at):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["target_form", "tag", "source_form", "frequency"])
    for e in rows:
        w.writerow([e.translation, e.tag, e.source_form, e.frequency])
    return buf.getvalue().encode("utf-8")


def lexicon_json(entries: list[LexiconEntry], tool_version: str, generated_at: str) -> bytes:
    rows = _accurate_rows(entries)
    doc = {
        "license": LICENSE_ID,
        "generator": f"poslex {tool_version}",
        "generated_at": generated_at,
        "entries": [
            {"target_form": e.translation, "tag": e.tag, "source_form": e.source_form, "frequency": e.frequency}
            for e in rows
        ],
    }
    return (json.dumps(doc, ensure_ascii=False, sort_keys=True, indent=1) + "\n").encode("utf-8")
