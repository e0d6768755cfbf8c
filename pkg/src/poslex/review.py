"""Human-judgment stage: the event journal and everything derived from it.

All state changes from triage onward are journal events; entry states are
never stored authoritatively, they are replayed. The journal is append-only
with a strictly increasing seq starting at 1.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import replace

from .errors import CorruptJournal, MalformedCsv, NothingToStrip, UnknownEntry
from .model import (
    LABELED_CORRECT,
    LABELED_NOT_CORRECT,
    LABELED_UNDECIDED,
    LABELS,
    REVIEWED_ACCURATE,
    REVIEWED_CONCERNED,
    REVIEWED_REPEATED,
    TRANSLATED,
    VERDICTS,
    LexiconEntry,
    ReviewEvent,
    transition,
)
from .normalize import normalize

DEFAULT_STRIP_PRONOUNS = ("من", "تۆ")

LIST_CORRECT = "correct"
LIST_NOT_CORRECT = "not-correct"
LIST_UNDECIDED = "undecided"
LIST_ACCURATE = "accurate"
LIST_REPEATED = "repeated"
LIST_CONCERNED = "concerned"

LIST_STATES = {
    LIST_CORRECT: LABELED_CORRECT,
    LIST_NOT_CORRECT: LABELED_NOT_CORRECT,
    LIST_UNDECIDED: LABELED_UNDECIDED,
    LIST_ACCURATE: REVIEWED_ACCURATE,
    LIST_REPEATED: REVIEWED_REPEATED,
    LIST_CONCERNED: REVIEWED_CONCERNED,
}


def event_line(event: ReviewEvent) -> str:
    return json.dumps(event.to_dict(), ensure_ascii=False, sort_keys=True)


def parse_journal(text: str) -> list[ReviewEvent]:
    """Parse journal text, enforcing the seq chain.

    A final line without a trailing newline that fails to parse is treated
    as a torn append and dropped; any other damage raises CorruptJournal
    naming the last intact seq.
    """
    events: list[ReviewEvent] = []
    last_good = 0
    lines = text.split("\n")
    torn_candidate = lines and lines[-1] != ""
    for idx, line in enumerate(lines):
        if line == "":
            continue
        is_final = idx == len(lines) - 1
        try:
            obj = json.loads(line)
            event = ReviewEvent.from_dict(obj)
        except (ValueError, KeyError, TypeError) as exc:
            if torn_candidate and is_final:
                break
            raise CorruptJournal(last_good, f"unparseable event after seq {last_good}") from exc
        if event.seq != last_good + 1:
            raise CorruptJournal(last_good, f"seq jumped from {last_good} to {event.seq}")
        events.append(event)
        last_good = event.seq
    return events


def read_journal(path) -> list[ReviewEvent]:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except FileNotFoundError:
        return []
    return parse_journal(text)


def replay(entries: list[LexiconEntry], events: list[ReviewEvent]) -> list[LexiconEntry]:
    """Apply events in order to the post-translation entry list."""
    by_id = {e.id: e for e in entries}
    for event in events:
        current = by_id.get(event.entry_id)
        if current is None:
            raise UnknownEntry(event.entry_id)
        by_id[current.id] = transition(current, event)
    return [by_id[e.id] for e in entries]


def detect_source_repeats(entries: list[LexiconEntry]) -> list[str]:
    """Ids of later entries sharing (tag, normalized source) with an earlier one.

    Only entries currently in the Correct pool are considered; the first
    occurrence in list order is the keeper.
    """
    seen: set[tuple[str, str]] = set()
    repeats: list[str] = []
    for e in entries:
        if e.state != LABELED_CORRECT or e.source_repeat:
            continue
        key = (e.tag, normalize(e.source_form))
        if key in seen:
            repeats.append(e.id)
        else:
            seen.add(key)
    return repeats


def collapse_groups(entries: list[LexiconEntry]) -> list[tuple[str, list[str]]]:
    """Plan the target-duplicate collapse over the Correct pool.

    Groups by (tag, normalized translation); within a group the keeper has
    the highest frequency, ties broken by lexicographically smallest source
    form, then smallest id. Returns (keeper_id, demoted_ids) pairs for
    groups of size > 1, demoted ids in a deterministic order. Entries
    flagged as source repeats never participate.
    """
    groups: dict[tuple[str, str], list[LexiconEntry]] = {}
    for e in entries:
        if e.state != LABELED_CORRECT or e.source_repeat or not e.translation:
            continue
        groups.setdefault((e.tag, normalize(e.translation)), []).append(e)

    plan: list[tuple[str, list[str]]] = []
    for key in sorted(groups):
        members = groups[key]
        if len(members) < 2:
            continue
        keeper = min(members, key=lambda e: (-e.frequency, e.source_form, e.id))
        losers = sorted(e.id for e in members if e.id != keeper.id)
        plan.append((keeper.id, losers))
    return plan


def order_queue(entries: list[LexiconEntry]) -> list[LexiconEntry]:
    """Annotation order: by tag code, then frequency descending, then form."""
    return sorted(entries, key=lambda e: (e.tag, -e.frequency, e.source_form))


def triage_queue(entries: list[LexiconEntry]) -> list[LexiconEntry]:
    return order_queue([e for e in entries if e.state == TRANSLATED])


def review_queue(entries: list[LexiconEntry]) -> list[LexiconEntry]:
    return order_queue([e for e in entries if e.state == LABELED_CORRECT and not e.source_repeat])


def strip_leading(translation: str, pronouns=DEFAULT_STRIP_PRONOUNS) -> str:
    for p in pronouns:
        if translation.startswith(p + " "):
            stripped = translation[len(p) + 1 :].strip()
            if stripped:
                return stripped
    raise NothingToStrip(f"no leading pronoun in {translation!r}")


def strip_trailing(translation: str, pronouns=DEFAULT_STRIP_PRONOUNS) -> str:
    for p in pronouns:
        if translation.endswith(" " + p):
            stripped = translation[: -(len(p) + 1)].strip()
            if stripped:
                return stripped
    raise NothingToStrip(f"no trailing pronoun in {translation!r}")


def can_strip_leading(translation: str | None, pronouns=DEFAULT_STRIP_PRONOUNS) -> bool:
    if not translation:
        return False
    try:
        strip_leading(translation, pronouns)
        return True
    except NothingToStrip:
        return False


def can_strip_trailing(translation: str | None, pronouns=DEFAULT_STRIP_PRONOUNS) -> bool:
    if not translation:
        return False
    try:
        strip_trailing(translation, pronouns)
        return True
    except NothingToStrip:
        return False


def partition_lists(entries: list[LexiconEntry]) -> dict[str, list[LexiconEntry]]:
    """The three triage lists and three review lists, annotation-ordered."""
    out: dict[str, list[LexiconEntry]] = {name: [] for name in LIST_STATES}
    for name, state in LIST_STATES.items():
        out[name] = order_queue([e for e in entries if e.state == state])
    return out


_LIST_COLUMNS = ["id", "source_form", "tag", "frequency", "translation"]


def list_csv(entries: list[LexiconEntry]) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_LIST_COLUMNS)
    for e in entries:
        w.writerow([e.id, e.source_form, e.tag, e.frequency, e.translation or ""])
    return buf.getvalue().encode("utf-8")


_TRIAGE_COLUMNS = ["id", "source_form", "tag", "frequency", "translation", "label"]


def triage_export_csv(entries: list[LexiconEntry]) -> bytes:
    """Pending triage queue as a spreadsheet round-trip file (label left blank)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_TRIAGE_COLUMNS)
    for e in triage_queue(entries):
        w.writerow([e.id, e.source_form, e.tag, e.frequency, e.translation or "", ""])
    return buf.getvalue().encode("utf-8")


def _parse_decision_csv(data: bytes, columns: list[str], allowed: dict, known_ids: set[str]):
    """Shared sheet parser: (line_no, entry_id, decision) rows, blanks skipped.

    The whole file is rejected on the first bad row so a partial import can
    never happen behind the operator's back.
    """
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise MalformedCsv(0, "file is not valid UTF-8") from exc
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows or rows[0] != columns:
        raise MalformedCsv(1, f"header must be {','.join(columns)}")
    out: list[tuple[int, str, str]] = []
    seen: set[str] = set()
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(columns):
            raise MalformedCsv(line_no, f"expected {len(columns)} columns, got {len(row)}")
        entry_id, decision = row[0], row[-1].strip()
        if entry_id not in known_ids:
            raise MalformedCsv(line_no, f"unknown entry id {entry_id}")
        if entry_id in seen:
            raise MalformedCsv(line_no, f"duplicate entry id {entry_id}")
        seen.add(entry_id)
        if decision == "":
            continue
        if decision not in allowed:
            raise MalformedCsv(line_no, f"decision must be one of {sorted(allowed)}, got {decision!r}")
        out.append((line_no, entry_id, decision))
    return out


def parse_triage_csv(data: bytes, known_ids: set[str]) -> list[tuple[int, str, str]]:
    return _parse_decision_csv(data, _TRIAGE_COLUMNS, LABELS, known_ids)


_REVIEW_COLUMNS = ["id", "source_form", "tag", "frequency", "translation", "verdict"]


def review_export_csv(entries: list[LexiconEntry]) -> bytes:
    """Pending review queue as a sheet (verdict left blank)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_REVIEW_COLUMNS)
    for e in review_queue(entries):
        w.writerow([e.id, e.source_form, e.tag, e.frequency, e.translation or "", ""])
    return buf.getvalue().encode("utf-8")


def parse_review_csv(data: bytes, known_ids: set[str]) -> list[tuple[int, str, str]]:
    return _parse_decision_csv(data, _REVIEW_COLUMNS, VERDICTS, known_ids)


def edit_reversal(entry: LexiconEntry) -> LexiconEntry:
    """Undo the most recent translation edit by applying its recorded before."""
    if not entry.edits:
        raise ValueError("entry has no edits to reverse")
    last = entry.edits[-1]
    return replace(entry, translation=last.before, edits=entry.edits[:-1])
