"""Project store: one directory holding the corpus artifacts, the journal
and a replayable snapshot.

Layout under the project directory:

    project.json     versioned snapshot (entries, counts, settings, seq)
    journal.jsonl    append-only event journal, the source of truth
    entries.csv      deduped entries as written by ingest
    quarantine.csv   rejected corpus lines
    translated.csv   entries after machine translation
    cache/           translation caches, one file per language pair
    exports/         lists, reports, charts, lexicon

Every mutation after translation goes through ``commit``, a single
serialized writer. Readers get plain lists of immutable entries and can
never observe a half-applied change.
"""

from __future__ import annotations

import datetime as _dt
import json
import os
import threading
from pathlib import Path

from . import corpus as corpus_mod
from . import review as review_mod
from . import translate as translate_mod
from .errors import ConflictError, MalformedCsv, StageError, UnknownEntry
from .model import (
    DEDUPED,
    EVENT_FLAG,
    EVENT_LABEL,
    EVENT_VERDICT,
    FLAG_SOURCE_REPEAT,
    LABELED_CORRECT,
    REVIEW_STATES,
    TRANSLATED,
    EditRecord,
    LexiconEntry,
    ReviewEvent,
    TagSet,
    default_tagset,
    transition,
)
from .normalize import normalize

SNAPSHOT_VERSION = 1
SYSTEM_ACTOR = "system"


def utc_now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def _entry_to_dict(e: LexiconEntry) -> dict:
    d = {
        "id": e.id,
        "source_form": e.source_form,
        "tag": e.tag,
        "frequency": e.frequency,
        "translation": e.translation,
        "state": e.state,
    }
    if e.ar_flag:
        d["ar_flag"] = True
    if e.source_repeat:
        d["source_repeat"] = True
    if e.edits:
        d["edits"] = [
            {"ts": ed.ts, "before": ed.before, "after": ed.after, "reason": ed.reason} for ed in e.edits
        ]
    return d


def _entry_from_dict(d: dict) -> LexiconEntry:
    edits = tuple(
        EditRecord(ts=ed["ts"], before=ed["before"], after=ed["after"], reason=ed.get("reason", "manual"))
        for ed in d.get("edits", [])
    )
    return LexiconEntry(
        id=d["id"],
        source_form=d["source_form"],
        tag=d["tag"],
        frequency=d["frequency"],
        translation=d.get("translation"),
        state=d["state"],
        ar_flag=bool(d.get("ar_flag", False)),
        source_repeat=bool(d.get("source_repeat", False)),
        edits=edits,
    )


class ProjectStore:
    """All pipeline state for one project directory."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self._lock = threading.Lock()
        self.tagset: TagSet = default_tagset()
        self.languages = {"src": "fa", "dst": "ckb"}
        self.strip_pronouns = list(review_mod.DEFAULT_STRIP_PRONOUNS)
        self.corpus_stats: dict = {}
        self.entries: list[LexiconEntry] = []
        self.seq = 0
        self._by_id: dict[str, LexiconEntry] = {}
        self._pos: dict[str, int] = {}
        self._correct_keys: dict[tuple[str, str], str] = {}
        self._journal_file = None

    # ---------- lifecycle ----------

    @classmethod
    def init(cls, root, tagset: TagSet | None = None, languages: dict | None = None,
             strip_pronouns=None) -> "ProjectStore":
        root = Path(root)
        if (root / "project.json").exists():
            raise StageError(f"project already initialized at {root}")
        root.mkdir(parents=True, exist_ok=True)
        (root / "cache").mkdir(exist_ok=True)
        (root / "exports").mkdir(exist_ok=True)
        store = cls(root)
        if tagset is not None:
            store.tagset = tagset
        if languages:
            store.languages = dict(languages)
        if strip_pronouns is not None:
            store.strip_pronouns = list(strip_pronouns)
        store.save_snapshot()
        return store

    @classmethod
    def open(cls, root) -> "ProjectStore":
        root = Path(root)
        snap_path = root / "project.json"
        if not snap_path.exists():
            raise StageError(f"no project at {root}")
        store = cls(root)
        with open(snap_path, encoding="utf-8") as f:
            snap = json.load(f)
        if snap.get("format_version") != SNAPSHOT_VERSION:
            raise StageError(f"unsupported snapshot version {snap.get('format_version')}")
        store.tagset = TagSet.from_dict(snap["tagset"])
        store.languages = dict(snap["languages"])
        store.strip_pronouns = list(snap["strip_pronouns"])
        store.corpus_stats = dict(snap["corpus_stats"])
        store.entries = [_entry_from_dict(d) for d in snap["entries"]]
        store.seq = 0
        store._reindex()

        # the journal, not the snapshot, is authoritative: replay the tail
        events = review_mod.read_journal(store.journal_path)
        store._heal_journal(events)
        snap_seq = int(snap.get("journal_seq", 0))
        tail = [ev for ev in events if ev.seq > snap_seq]
        if tail:
            store.entries = review_mod.replay(store.entries, tail)
            store._reindex()
        store.seq = events[-1].seq if events else snap_seq
        return store

    @property
    def journal_path(self) -> Path:
        return self.root / "journal.jsonl"

    def _heal_journal(self, events: list[ReviewEvent]) -> None:
        """Truncate a torn final append so the next event starts a fresh line.

        Without this, appending after a crash would glue the new event onto
        the leftover fragment and turn a tolerated torn tail into real
        interior corruption on the following open.
        """
        path = self.journal_path
        if not path.exists():
            return
        raw = path.read_text(encoding="utf-8")
        lines = raw.split("\n")
        keep = 0
        seen = 0
        for i, line in enumerate(lines):
            if seen == len(events):
                break
            if line.strip():
                seen += 1
            keep = i + 1
        good = "\n".join(lines[:keep])
        if good:
            good += "\n"
        if raw != good:
            tmp = path.with_suffix(".tmp")
            tmp.write_text(good, encoding="utf-8")
            os.replace(tmp, path)

    @property
    def exports_dir(self) -> Path:
        return self.root / "exports"

    def _reindex(self) -> None:
        self._by_id = {e.id: e for e in self.entries}
        self._pos = {e.id: i for i, e in enumerate(self.entries)}
        self._correct_keys = {}
        for e in self.entries:
            if e.source_repeat:
                continue
            if e.state == LABELED_CORRECT or e.state in REVIEW_STATES:
                key = (e.tag, normalize(e.source_form))
                self._correct_keys.setdefault(key, e.id)

    def snapshot_dict(self) -> dict:
        return {
            "format_version": SNAPSHOT_VERSION,
            "journal_seq": self.seq,
            "languages": self.languages,
            "strip_pronouns": self.strip_pronouns,
            "corpus_stats": self.corpus_stats,
            "tagset": self.tagset.to_dict(),
            "entries": [_entry_to_dict(e) for e in self.entries],
        }

    def snapshot_bytes(self) -> bytes:
        # deliberately no wall-clock field: the same journal must always
        # produce the same bytes
        return json.dumps(self.snapshot_dict(), ensure_ascii=False, sort_keys=True, indent=1).encode("utf-8")

    def save_snapshot(self) -> None:
        tmp = self.root / "project.json.tmp"
        with open(tmp, "wb") as f:
            f.write(self.snapshot_bytes())
            f.write(b"\n")
        os.replace(tmp, self.root / "project.json")

    # ---------- ingest ----------

    def ingest(self, data: bytes, fmt: corpus_mod.CorpusFormat | None = None) -> dict:
        """Parse, quarantine, dedup, and persist the corpus artifacts."""
        if self.entries:
            raise StageError("corpus already ingested; start a new project to re-ingest")
        fmt = fmt or corpus_mod.CorpusFormat()
        tokens, quarantined = corpus_mod.parse_corpus(data, fmt, self.tagset)
        entries = corpus_mod.dedup(tokens)
        self.entries = entries
        self.corpus_stats = {
            "token_count": len(tokens),
            "quarantined_count": len(quarantined),
            "deduped_count": len(entries),
        }
        self._reindex()
        (self.root / "entries.csv").write_bytes(corpus_mod.entries_csv(entries))
        (self.root / "quarantine.csv").write_bytes(corpus_mod.quarantine_csv(quarantined))
        self.save_snapshot()
        return dict(self.corpus_stats)

    # ---------- translate ----------

    def cache_path(self) -> Path:
        pair = f"{self.languages['src']}-{self.languages['dst']}"
        return self.root / "cache" / f"{pair}.tsv"

    def translate(
        self,
        backend: translate_mod.TranslatorBackend,
        cfg: translate_mod.TranslateConfig | None = None,
        cache: translate_mod.TranslationCache | None = None,
        sleep_fn=None,
    ) -> translate_mod.TranslationResult:
        if not self.entries:
            raise StageError("no deduped entries")
        cfg = cfg or translate_mod.TranslateConfig()
        if cache is None:
            cache = translate_mod.TranslationCache(
                self.cache_path(), self.languages["src"], self.languages["dst"]
            )
        kwargs = {}
        if sleep_fn is not None:
            kwargs["sleep_fn"] = sleep_fn
        result = translate_mod.translate_entries(
            self.entries, backend, cfg, cache,
            src_lang=self.languages["src"], dst_lang=self.languages["dst"], **kwargs,
        )
        self.entries = result.entries
        self._reindex()
        (self.root / "translated.csv").write_bytes(translate_mod.export_translated_csv(self.entries))
        self.save_snapshot()
        return result

    # ---------- the single-writer commit point ----------

    def _open_journal(self):
        if self._journal_file is None:
            self._journal_file = open(self.journal_path, "a", encoding="utf-8")
        return self._journal_file

    def close(self) -> None:
        if self._journal_file is not None:
            self._journal_file.close()
            self._journal_file = None

    def _append(self, event: ReviewEvent, updated: LexiconEntry) -> None:
        f = self._open_journal()
        f.write(review_mod.event_line(event) + "\n")
        f.flush()
        os.fsync(f.fileno())
        self.seq = event.seq
        self._by_id[updated.id] = updated
        self.entries[self._pos[updated.id]] = updated

    def commit(
        self,
        entry_id: str,
        kind: str,
        payload: dict,
        actor: str,
        expected_seq: int | None = None,
    ) -> tuple[ReviewEvent, LexiconEntry]:
        """Validate and append one event; the only way state changes.

        ``expected_seq`` is the optimistic-concurrency token: a caller who
        read state at seq N passes N and loses with ConflictError if anyone
        committed in between.
        """
        with self._lock:
            return self._commit_locked(entry_id, kind, payload, actor, expected_seq)

    def _commit_locked(self, entry_id, kind, payload, actor, expected_seq=None):
        if expected_seq is not None and expected_seq != self.seq:
            raise ConflictError(f"expected seq {expected_seq}, project is at {self.seq}")
        entry = self._by_id.get(entry_id)
        if entry is None:
            raise UnknownEntry(entry_id)
        event = ReviewEvent(
            seq=self.seq + 1,
            entry_id=entry_id,
            kind=kind,
            payload=payload,
            actor=actor,
            ts=utc_now(),
        )
        updated = transition(entry, event)  # raises before anything is written
        self._append(event, updated)
        followups = self._autoflag_locked(updated, actor=SYSTEM_ACTOR)
        if followups:
            updated = self._by_id[entry_id]
        return event, updated

    def _autoflag_locked(self, entry: LexiconEntry, actor: str) -> int:
        """Flag a fresh Correct entry that repeats an earlier source form."""
        if entry.state != LABELED_CORRECT or entry.source_repeat:
            return 0
        key = (entry.tag, normalize(entry.source_form))
        keeper = self._correct_keys.get(key)
        if keeper is None:
            self._correct_keys[key] = entry.id
            return 0
        if keeper == entry.id:
            return 0
        event = ReviewEvent(
            seq=self.seq + 1,
            entry_id=entry.id,
            kind=EVENT_FLAG,
            payload={"flag": FLAG_SOURCE_REPEAT, "duplicate_of": keeper},
            actor=actor,
            ts=utc_now(),
        )
        updated = transition(self._by_id[entry.id], event)
        self._append(event, updated)
        return 1

    # ---------- convenience mutations ----------

    def label(self, entry_id: str, label: str | None, actor: str, expected_seq: int | None = None):
        return self.commit(entry_id, EVENT_LABEL, {"label": label}, actor, expected_seq)

    def verdict(self, entry_id: str, verdict: str, actor: str, expected_seq: int | None = None):
        return self.commit(entry_id, EVENT_VERDICT, {"verdict": verdict}, actor, expected_seq)

    def edit(self, entry_id: str, kind: str, actor: str, after: str | None = None,
             expected_seq: int | None = None):
        """Translation edit: kind is strip_leading, strip_trailing, or manual."""
        entry = self._by_id.get(entry_id)
        if entry is None:
            raise UnknownEntry(entry_id)
        before = entry.translation
        if kind == "strip_leading":
            new = review_mod.strip_leading(before or "", self.strip_pronouns)
        elif kind == "strip_trailing":
            new = review_mod.strip_trailing(before or "", self.strip_pronouns)
        elif kind == "manual":
            new = after if after is not None else ""
        else:
            raise ValueError(f"unknown edit kind {kind!r}")
        payload = {"before": before, "after": new, "reason": kind}
        return self.commit(entry_id, "edit", payload, actor, expected_seq)

    def triage_import(self, rows: list[tuple[int, str, str]], actor: str) -> int:
        """Apply bulk labels from a triage sheet; repeats get flagged as they land.

        Rows are (line_no, entry_id, label). The whole batch is checked
        against the lifecycle before a single event is written: a sheet
        with one bad row imports nothing.
        """
        with self._lock:
            for line_no, eid, _ in rows:
                entry = self._by_id.get(eid)
                if entry is None:
                    raise MalformedCsv(line_no, f"unknown entry id {eid}")
                if entry.state != TRANSLATED:
                    raise MalformedCsv(line_no, f"entry {eid} is in state {entry.state}, not translated")
            for _, eid, label in rows:
                self._commit_locked(eid, EVENT_LABEL, {"label": label}, actor)
        return len(rows)

    def review_import(self, rows: list[tuple[int, str, str]], actor: str) -> int:
        """Bulk verdicts, same whole-batch validation as triage_import."""
        with self._lock:
            for line_no, eid, _ in rows:
                entry = self._by_id.get(eid)
                if entry is None:
                    raise MalformedCsv(line_no, f"unknown entry id {eid}")
                if entry.state != LABELED_CORRECT:
                    raise MalformedCsv(line_no, f"entry {eid} is in state {entry.state}, not labeled correct")
                if entry.source_repeat:
                    raise MalformedCsv(line_no, f"entry {eid} is a flagged source repeat")
            for _, eid, verdict in rows:
                self._commit_locked(eid, EVENT_VERDICT, {"verdict": verdict}, actor)
        return len(rows)

    def collapse_repeats(self, actor: str = SYSTEM_ACTOR) -> list[tuple[str, list[str]]]:
        """Demote duplicate-translation entries to a repeated verdict."""
        plan = review_mod.collapse_groups(self.entries)
        for keeper, losers in plan:
            for loser in losers:
                self.commit(
                    loser,
                    EVENT_VERDICT,
                    {"verdict": "repeated", "duplicate_of": keeper},
                    actor,
                )
        return plan

    # ---------- read side ----------

    def get(self, entry_id: str) -> LexiconEntry:
        entry = self._by_id.get(entry_id)
        if entry is None:
            raise UnknownEntry(entry_id)
        return entry

    def ids(self) -> set[str]:
        return set(self._by_id)

    def state_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for e in self.entries:
            counts[e.state] = counts.get(e.state, 0) + 1
        return counts

    def write_exports(self) -> list[Path]:
        """The six decision lists under exports/."""
        self.exports_dir.mkdir(exist_ok=True)
        written = []
        for name, members in review_mod.partition_lists(self.entries).items():
            path = self.exports_dir / f"{name}.csv"
            path.write_bytes(review_mod.list_csv(members))
            written.append(path)
        return written


