"""Machine-translation stage: pluggable backends, persistent cache, batching.

The backend contract is a single ``translate_batch`` call returning one
result per input, in input order; ``None`` marks a per-item miss. Transient
trouble is an exception from the backend, retried here; when retries run
out the stage aborts with everything committed so far on disk, so a rerun
continues instead of restarting.
"""

from __future__ import annotations

import csv
import io
import math
import threading
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import requests

from .errors import BackendUnavailable, MalformedCsv, StageError
from .model import ALL_STATES, DEDUPED, RAW, TRANSLATED, LexiconEntry, entry_id

MISS_ECHO = "echo"
MISS_FAIL = "fail"

FAIL_MISS = "backend_miss"
FAIL_EMPTY = "empty_translation"


class TranslatorBackend:
    """Interface: translate a batch, one output per input, input order kept."""

    def translate_batch(self, items, src_lang: str, dst_lang: str) -> list[str | None]:
        raise NotImplementedError


class StubBackend(TranslatorBackend):
    """Deterministic offline backend driven by a fixed dictionary.

    miss_policy "echo" returns the input unchanged on a miss, "fail" returns
    a per-item failure. Counts calls so tests can assert cache behavior.
    """

    def __init__(self, dictionary: dict[str, str], miss_policy: str = MISS_ECHO):
        if miss_policy not in (MISS_ECHO, MISS_FAIL):
            raise ValueError(f"unknown miss policy {miss_policy!r}")
        self.dictionary = dict(dictionary)
        self.miss_policy = miss_policy
        self.calls = 0
        self.items_seen = 0
        self._lock = threading.Lock()

    def translate_batch(self, items, src_lang: str, dst_lang: str) -> list[str | None]:
        with self._lock:
            self.calls += 1
            self.items_seen += len(items)
        out: list[str | None] = []
        for item in items:
            hit = self.dictionary.get(item)
            if hit is not None:
                out.append(hit)
            elif self.miss_policy == MISS_ECHO:
                out.append(item)
            else:
                out.append(None)
        return out


class HttpBackend(TranslatorBackend):
    """JSON-over-HTTP adapter: POST {"texts", "from", "to"} -> {"translations"}."""

    def __init__(self, url: str, api_key: str | None = None, timeout: float = 30.0, session=None):
        self.url = url
        self.api_key = api_key
        self.timeout = timeout
        self.session = session or requests.Session()

    def translate_batch(self, items, src_lang: str, dst_lang: str) -> list[str | None]:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {"texts": list(items), "from": src_lang, "to": dst_lang}
        resp = self.session.post(self.url, json=payload, headers=headers, timeout=self.timeout)
        if resp.status_code != 200:
            raise BackendUnavailable(f"backend returned HTTP {resp.status_code}")
        body = resp.json()
        translations = body.get("translations")
        if not isinstance(translations, list) or len(translations) != len(items):
            raise BackendUnavailable("backend response does not align with request")
        return [t if isinstance(t, str) and t else None for t in translations]


class FallbackChain(TranslatorBackend):
    """Try each backend in order; the first non-miss per item wins."""

    def __init__(self, backends: list[TranslatorBackend]):
        if not backends:
            raise ValueError("fallback chain needs at least one backend")
        self.backends = list(backends)

    def translate_batch(self, items, src_lang: str, dst_lang: str) -> list[str | None]:
        items = list(items)
        results: list[str | None] = [None] * len(items)
        last_error: Exception | None = None
        reached_any = False
        for backend in self.backends:
            missing = [i for i, r in enumerate(results) if r is None]
            if not missing:
                break
            try:
                got = backend.translate_batch([items[i] for i in missing], src_lang, dst_lang)
            except Exception as exc:  # noqa: BLE001 - a dead vendor must not sink the chain
                last_error = exc
                continue
            reached_any = True
            for i, value in zip(missing, got):
                if value:
                    results[i] = value
        if not reached_any and last_error is not None:
            raise BackendUnavailable(str(last_error)) from last_error
        return results


def stub_backend(dictionary: dict[str, str], miss_policy: str = MISS_ECHO) -> StubBackend:
    return StubBackend(dictionary, miss_policy)


def _escape(value: str) -> str:
    return value.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def _unescape(value: str) -> str:
    out = []
    i = 0
    while i < len(value):
        ch = value[i]
        if ch == "\\" and i + 1 < len(value):
            nxt = value[i + 1]
            out.append({"t": "\t", "n": "\n", "\\": "\\"}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


class TranslationCache:
    """source -> target map for one language pair, persisted as sorted TSV."""

    def __init__(self, path, src_lang: str, dst_lang: str):
        self.path = path
        self.src_lang = src_lang
        self.dst_lang = dst_lang
        self._map: dict[str, str] = {}
        self._lock = threading.Lock()
        self.load()

    def load(self) -> None:
        try:
            with open(self.path, encoding="utf-8") as f:
                text = f.read()
        except FileNotFoundError:
            return
        loaded = {}
        for line in text.split("\n"):
            if not line:
                continue
            source, _, target = line.partition("\t")
            loaded[_unescape(source)] = _unescape(target)
        with self._lock:
            self._map = loaded

    def save(self) -> None:
        with self._lock:
            items = sorted(self._map.items())
        lines = [f"{_escape(s)}\t{_escape(t)}" for s, t in items]
        tmp = f"{self.path}.tmp"
        with open(tmp, "w", encoding="utf-8") as f:
            f.write("\n".join(lines))
            if lines:
                f.write("\n")
        import os

        os.replace(tmp, self.path)

    def get(self, source: str) -> str | None:
        with self._lock:
            return self._map.get(source)

    def put(self, source: str, target: str) -> None:
        with self._lock:
            self._map[source] = target

    def __len__(self) -> int:
        with self._lock:
            return len(self._map)


class MemoryCache(TranslationCache):
    """Cache with no backing file; useful for tests and one-shot runs."""

    def __init__(self, src_lang: str = "fa", dst_lang: str = "ckb"):
        self.path = None
        self.src_lang = src_lang
        self.dst_lang = dst_lang
        self._map = {}
        self._lock = threading.Lock()

    def load(self) -> None:
        pass

    def save(self) -> None:
        pass


class RateLimiter:
    """Sliding-window limiter: at most ceil(rate) calls in any 1-second window.

    Clock and sleep are injectable so the contract is testable without
    real waiting.
    """

    def __init__(self, rate_per_sec: float, time_fn=time.monotonic, sleep_fn=time.sleep):
        if rate_per_sec <= 0:
            raise ValueError("rate_per_sec must be positive")
        self.burst = math.ceil(rate_per_sec)
        self._time = time_fn
        self._sleep = sleep_fn
        self._window: deque[float] = deque()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._time()
                while self._window and self._window[0] <= now - 1.0:
                    self._window.popleft()
                if len(self._window) < self.burst:
                    self._window.append(now)
                    return
                wait = self._window[0] + 1.0 - now
            self._sleep(max(wait, 0.0))


@dataclass(frozen=True)
class TranslateConfig:
    batch_size: int = 50
    max_in_flight: int = 1
    retries: int = 2
    rate_per_sec: float = 5.0
    retry_backoff: float = 1.0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")
        if self.rate_per_sec <= 0:
            raise ValueError("rate_per_sec must be positive")


@dataclass(frozen=True)
class TranslationFailure:
    entry_id: str
    source_form: str
    reason: str


@dataclass
class TranslationResult:
    entries: list[LexiconEntry] = field(default_factory=list)
    failures: list[TranslationFailure] = field(default_factory=list)
    backend_calls: int = 0
    batches: int = 0
    cache_hits: int = 0

    @property
    def translated_count(self) -> int:
        return sum(1 for e in self.entries if e.state == TRANSLATED)


def plan_batches(pending: int, batch_size: int) -> int:
    return math.ceil(pending / batch_size) if pending else 0


def translate_entries(
    entries: list[LexiconEntry],
    backend: TranslatorBackend,
    cfg: TranslateConfig,
    cache: TranslationCache,
    src_lang: str = "fa",
    dst_lang: str = "ckb",
    sleep_fn=time.sleep,
    rate_limiter: RateLimiter | None = None,
) -> TranslationResult:
    """Attach translations to all deduped entries.

    Already-translated entries pass through untouched so an interrupted run
    can simply be repeated. The final entry list keeps input order and input
    count no matter how batches complete.
    """
    for e in entries:
        if e.state not in (DEDUPED, TRANSLATED):
            raise StageError(f"entry {e.id} is in state {e.state}; translation accepts deduped entries only")

    limiter = rate_limiter or RateLimiter(cfg.rate_per_sec, sleep_fn=sleep_fn)

    pending_sources: list[str] = []
    seen: set[str] = set()
    result = TranslationResult()
    for e in entries:
        if e.state != DEDUPED or e.source_form in seen:
            continue
        seen.add(e.source_form)
        if cache.get(e.source_form) is not None:
            result.cache_hits += 1
        else:
            pending_sources.append(e.source_form)

    batches = [
        pending_sources[i : i + cfg.batch_size] for i in range(0, len(pending_sources), cfg.batch_size)
    ]
    result.batches = len(batches)

    commit_lock = threading.Lock()
    calls = [0]
    abort: list[Exception] = []

    def run_batch(batch: list[str]) -> None:
        if abort:
            return
        attempt = 0
        while True:
            try:
                limiter.acquire()
                with commit_lock:
                    calls[0] += 1
                got = backend.translate_batch(batch, src_lang, dst_lang)
                break
            except Exception as exc:  # noqa: BLE001 - transient vendor failure
                attempt += 1
                if attempt > cfg.retries:
                    abort.append(BackendUnavailable(f"batch failed after {cfg.retries} retries: {exc}"))
                    return
                sleep_fn(cfg.retry_backoff * (2 ** (attempt - 1)))
        if len(got) != len(batch):
            abort.append(BackendUnavailable("backend response does not align with request"))
            return
        with commit_lock:
            for source, target in zip(batch, got):
                if target:
                    cache.put(source, target)
            cache.save()  # checkpoint: a rerun resumes from here

    if cfg.max_in_flight == 1 or len(batches) <= 1:
        for batch in batches:
            run_batch(batch)
            if abort:
                break
    else:
        with ThreadPoolExecutor(max_workers=cfg.max_in_flight) as pool:
            list(pool.map(run_batch, batches))

    result.backend_calls = calls[0]
    if abort:
        raise abort[0]

    for e in entries:
        if e.state == TRANSLATED:
            result.entries.append(e)
            continue
        target = cache.get(e.source_form)
        if target:
            result.entries.append(replace(e, state=TRANSLATED, translation=target))
        else:
            reason = FAIL_EMPTY if target == "" else FAIL_MISS
            result.failures.append(TranslationFailure(e.id, e.source_form, reason))
            result.entries.append(e)
    return result


_CSV_COLUMNS = ["id", "source_form", "tag", "frequency", "translation", "state"]


def export_translated_csv(entries: list[LexiconEntry]) -> bytes:
    """The translation-stage file; every entry must be at least deduped."""
    for e in entries:
        if e.state == RAW:
            raise StageError(f"entry {e.id} is raw; dedup before exporting")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_CSV_COLUMNS)
    for e in entries:
        w.writerow([e.id, e.source_form, e.tag, e.frequency, e.translation or "", e.state])
    return buf.getvalue().encode("utf-8")


def import_translated_csv(data: bytes) -> list[LexiconEntry]:
    """Inverse of export_translated_csv, validating every row.

    Ids are recomputed from content so a hand-mangled row cannot smuggle in
    a mismatched identity.
    """
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise MalformedCsv(0, "file is not valid UTF-8") from exc
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != _CSV_COLUMNS:
        raise MalformedCsv(1, f"header must be {','.join(_CSV_COLUMNS)}")
    entries: list[LexiconEntry] = []
    seen: set[str] = set()
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(_CSV_COLUMNS):
            raise MalformedCsv(line_no, f"expected {len(_CSV_COLUMNS)} columns, got {len(row)}")
        eid, source_form, tag, freq_raw, translation, state = row
        if entry_id(source_form, tag) != eid:
            raise MalformedCsv(line_no, f"id {eid} does not match source form and tag")
        if eid in seen:
            raise MalformedCsv(line_no, f"duplicate entry id {eid}")
        seen.add(eid)
        try:
            frequency = int(freq_raw)
        except ValueError:
            raise MalformedCsv(line_no, f"frequency must be an integer, got {freq_raw!r}") from None
        if frequency < 1:
            raise MalformedCsv(line_no, f"frequency must be >= 1, got {frequency}")
        if state not in ALL_STATES or state == RAW:
            raise MalformedCsv(line_no, f"bad state {state!r}")
        if state == DEDUPED and translation:
            raise MalformedCsv(line_no, "deduped entry cannot carry a translation")
        if state != DEDUPED and not translation:
            raise MalformedCsv(line_no, f"state {state} requires a translation")
        entries.append(
            LexiconEntry(
                id=eid,
                source_form=source_form,
                tag=tag,
                frequency=frequency,
                translation=translation or None,
                state=state,
            )
        )
    return entries


def load_dictionary(path) -> dict[str, str]:
    """Read a source<TAB>target dictionary file (same format as the cache)."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            source, _, target = line.partition("\t")
            if source and target:
                out[_unescape(source)] = _unescape(target)
    return out
