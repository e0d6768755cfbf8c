"""Core domain model: tag catalog, lexicon entries, lifecycle states and events.

Entries are immutable values; every state change goes through ``transition``,
which returns a new entry and never mutates its input. The journal event is
the single unit of change for everything that happens after translation.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, replace
from importlib import resources

from .errors import IllegalTransition, NotArTagged, UnknownEntry

TAG_CODE_RE = re.compile(r"^[A-Z][A-Z_]*$")

AR_TAG = "AR"

# Lifecycle states. An entry moves forward only:
# raw -> deduped -> translated -> labeled_* -> reviewed_*
# and reviewed_* is reachable only from labeled_correct.
RAW = "raw"
DEDUPED = "deduped"
TRANSLATED = "translated"
LABELED_CORRECT = "labeled_correct"
LABELED_NOT_CORRECT = "labeled_not_correct"
LABELED_UNDECIDED = "labeled_undecided"
REVIEWED_ACCURATE = "reviewed_accurate"
REVIEWED_REPEATED = "reviewed_repeated"
REVIEWED_CONCERNED = "reviewed_concerned"

ALL_STATES = (
    RAW,
    DEDUPED,
    TRANSLATED,
    LABELED_CORRECT,
    LABELED_NOT_CORRECT,
    LABELED_UNDECIDED,
    REVIEWED_ACCURATE,
    REVIEWED_REPEATED,
    REVIEWED_CONCERNED,
)

LABEL_STATES = (LABELED_CORRECT, LABELED_NOT_CORRECT, LABELED_UNDECIDED)
REVIEW_STATES = (REVIEWED_ACCURATE, REVIEWED_REPEATED, REVIEWED_CONCERNED)

# stage rank: used for ">= translated" style checks
STAGE_RANK = {RAW: 0, DEDUPED: 1, TRANSLATED: 2}
STAGE_RANK.update({s: 3 for s in LABEL_STATES})
STAGE_RANK.update({s: 4 for s in REVIEW_STATES})

LABELS = {"correct": LABELED_CORRECT, "not-correct": LABELED_NOT_CORRECT, "undecided": LABELED_UNDECIDED}
VERDICTS = {"accurate": REVIEWED_ACCURATE, "repeated": REVIEWED_REPEATED, "concerned": REVIEWED_CONCERNED}

EVENT_LABEL = "label"
EVENT_EDIT = "edit"
EVENT_VERDICT = "verdict"
EVENT_FLAG = "flag"

FLAG_AR = "ar"
FLAG_SOURCE_REPEAT = "source_repeat"


@dataclass(frozen=True)
class TagDef:
    code: str
    description: str
    category: str


@dataclass(frozen=True)
class TagSet:
    name: str
    tags: tuple[TagDef, ...]

    def __post_init__(self):
        seen = set()
        for tag in self.tags:
            if not TAG_CODE_RE.match(tag.code):
                raise ValueError(f"invalid tag code {tag.code!r}")
            if tag.code in seen:
                raise ValueError(f"duplicate tag code {tag.code!r}")
            seen.add(tag.code)

    def lookup(self, code: str) -> TagDef | None:
        return self._by_code().get(code)

    def __contains__(self, code: str) -> bool:
        return code in self._by_code()

    def codes(self) -> tuple[str, ...]:
        return tuple(t.code for t in self.tags)

    def _by_code(self) -> dict[str, TagDef]:
        cached = self.__dict__.get("_index")
        if cached is None:
            cached = {t.code: t for t in self.tags}
            object.__setattr__(self, "_index", cached)
        return cached

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "tags": [{"code": t.code, "description": t.description, "category": t.category} for t in self.tags],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TagSet":
        tags = tuple(TagDef(t["code"], t.get("description", ""), t.get("category", "other")) for t in data["tags"])
        return cls(name=data["name"], tags=tags)


_DEFAULT_TAGSET: TagSet | None = None


def default_tagset() -> TagSet:
    """The bundled 38-tag catalog (37 content tags plus AR, AR last)."""
    global _DEFAULT_TAGSET
    if _DEFAULT_TAGSET is None:
        raw = resources.files("poslex.data").joinpath("tagset_default.json").read_text("utf-8")
        _DEFAULT_TAGSET = TagSet.from_dict(json.loads(raw))
    return _DEFAULT_TAGSET


def load_tagset(path) -> TagSet:
    with open(path, encoding="utf-8") as f:
        return TagSet.from_dict(json.load(f))


@dataclass(frozen=True)
class EditRecord:
    ts: str
    before: str
    after: str
    reason: str


@dataclass(frozen=True)
class LexiconEntry:
    id: str
    source_form: str
    tag: str
    frequency: int
    translation: str | None = None
    state: str = RAW
    ar_flag: bool = False
    source_repeat: bool = False
    edits: tuple[EditRecord, ...] = ()

    def stage_rank(self) -> int:
        return STAGE_RANK[self.state]


def entry_id(source_form: str, tag: str) -> str:
    """Stable content-derived id; identical (form, tag) pairs always collide.

    The length prefix keeps the key unambiguous even if a surface form
    contains the separator.
    """
    key = f"{len(source_form)}\t{source_form}\t{tag}"
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class ReviewEvent:
    seq: int
    entry_id: str
    kind: str
    payload: dict
    actor: str
    ts: str

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "entry_id": self.entry_id,
            "kind": self.kind,
            "payload": self.payload,
            "actor": self.actor,
            "ts": self.ts,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReviewEvent":
        return cls(
            seq=int(data["seq"]),
            entry_id=data["entry_id"],
            kind=data["kind"],
            payload=dict(data["payload"]),
            actor=data["actor"],
            ts=data["ts"],
        )


def transition(entry: LexiconEntry, event: ReviewEvent) -> LexiconEntry:
    """Apply one event to one entry, returning the updated entry.

    Pure: raises before touching anything, never mutates its input. All
    lifecycle legality lives here so that live application and journal
    replay cannot diverge.
    """
    if event.entry_id != entry.id:
        raise UnknownEntry(f"event targets {event.entry_id}, entry is {entry.id}")

    if event.kind == EVENT_LABEL:
        label = event.payload.get("label")
        if label is None:
            # compensating event: withdraw an existing label
            if entry.state not in LABEL_STATES:
                raise IllegalTransition(f"cannot unlabel entry in state {entry.state}")
            return replace(entry, state=TRANSLATED)
        if label not in LABELS:
            raise IllegalTransition(f"unknown label {label!r}")
        if entry.state != TRANSLATED:
            raise IllegalTransition(f"cannot label entry in state {entry.state}")
        return replace(entry, state=LABELS[label])

    if event.kind == EVENT_VERDICT:
        verdict = event.payload.get("verdict")
        if verdict not in VERDICTS:
            raise IllegalTransition(f"unknown verdict {verdict!r}")
        if entry.state != LABELED_CORRECT:
            raise IllegalTransition(f"cannot review entry in state {entry.state}")
        return replace(entry, state=VERDICTS[verdict])

    if event.kind == EVENT_EDIT:
        if entry.state not in (TRANSLATED, LABELED_CORRECT):
            raise IllegalTransition(f"cannot edit entry in state {entry.state}")
        before = event.payload.get("before")
        after = event.payload.get("after")
        reason = event.payload.get("reason", "manual")
        if entry.translation != before:
            raise IllegalTransition("edit base text does not match current translation")
        if not after:
            raise IllegalTransition("edit would leave an empty translation")
        record = EditRecord(ts=event.ts, before=before, after=after, reason=reason)
        return replace(entry, translation=after, edits=entry.edits + (record,))

    if event.kind == EVENT_FLAG:
        flag = event.payload.get("flag")
        if flag == FLAG_AR:
            if entry.tag != AR_TAG:
                raise NotArTagged(f"entry {entry.id} is tagged {entry.tag}, not {AR_TAG}")
            return replace(entry, ar_flag=True)
        if flag == FLAG_SOURCE_REPEAT:
            if entry.state != LABELED_CORRECT:
                raise IllegalTransition(f"source-repeat flag requires a correct-labeled entry, got {entry.state}")
            return replace(entry, source_repeat=True)
        raise IllegalTransition(f"unknown flag {flag!r}")

    raise IllegalTransition(f"unknown event kind {event.kind!r}")
