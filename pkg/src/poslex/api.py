"""HTTP face of the annotation workflow.

Thin by design: every request is translated into a store call and every
domain error into a status code. 404 unknown entry or list, 409 for lost
races and lifecycle violations, 400 for bodies that do not make sense.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import Body, FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import __version__
from . import review as review_mod
from . import stats as stats_mod
from .errors import (
    ConflictError,
    EmptyDistribution,
    IllegalTransition,
    NotArTagged,
    NothingToStrip,
    UnknownEntry,
)
from .model import LABELS, VERDICTS
from .project import ProjectStore

EDIT_KINDS = ("strip_leading", "strip_trailing", "manual")


def _entry_json(store: ProjectStore, entry) -> dict:
    tag_def = store.tagset.lookup(entry.tag)
    return {
        "id": entry.id,
        "source_form": entry.source_form,
        "tag": entry.tag,
        "tag_gloss": tag_def.description if tag_def else "",
        "tag_category": tag_def.category if tag_def else "other",
        "frequency": entry.frequency,
        "translation": entry.translation,
        "state": entry.state,
        "ar_flag": entry.ar_flag,
        "source_repeat": entry.source_repeat,
        "can_strip_leading": review_mod.can_strip_leading(entry.translation, store.strip_pronouns),
        "can_strip_trailing": review_mod.can_strip_trailing(entry.translation, store.strip_pronouns),
        "edit_count": len(entry.edits),
    }


def create_app(store: ProjectStore, token: str | None = None, static_dir=None) -> FastAPI:
    app = FastAPI(title="poslex", version=__version__, docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def _bad_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "malformed request body"})

    @app.exception_handler(UnknownEntry)
    async def _unknown(request: Request, exc: UnknownEntry):
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.exception_handler(ConflictError)
    async def _conflict(request: Request, exc: ConflictError):
        return JSONResponse(status_code=409, content={"error": str(exc), "seq": store.seq})

    @app.exception_handler(IllegalTransition)
    async def _illegal(request: Request, exc: IllegalTransition):
        return JSONResponse(status_code=409, content={"error": str(exc), "seq": store.seq})

    @app.middleware("http")
    async def _auth(request: Request, call_next):
        if token and request.url.path.startswith("/api/"):
            supplied = request.headers.get("authorization", "")
            if supplied != f"Bearer {token}":
                return JSONResponse(status_code=401, content={"error": "missing or bad token"})
        return await call_next(request)

    def bad(message: str) -> JSONResponse:
        return JSONResponse(status_code=400, content={"error": message})

    @app.get("/api/queue")
    def queue(stage: str = "triage", limit: int = 10):
        if stage == "triage":
            pending = review_mod.triage_queue(store.entries)
        elif stage == "review":
            pending = review_mod.review_queue(store.entries)
        else:
            return bad(f"stage must be triage or review, got {stage!r}")
        if limit < 1:
            return bad("limit must be >= 1")
        return {
            "stage": stage,
            "seq": store.seq,
            "pending": len(pending),
            "entries": [_entry_json(store, e) for e in pending[:limit]],
        }

    def _expected_seq(body: dict):
        raw = body.get("expected_seq")
        if raw is None:
            return None
        if not isinstance(raw, int) or isinstance(raw, bool):
            raise ValueError("expected_seq must be an integer")
        return raw

    def _actor(body: dict) -> str:
        actor = body.get("actor")
        if not isinstance(actor, str) or not actor.strip():
            raise ValueError("actor is required")
        return actor.strip()

    @app.post("/api/entries/{entry_id}/label")
    def label(entry_id: str, body: dict = Body(...)):
        try:
            actor = _actor(body)
            expected = _expected_seq(body)
            value = body.get("label")
            if value is not None and value not in LABELS:
                raise ValueError(f"label must be one of {sorted(LABELS)} or null")
        except ValueError as exc:
            return bad(str(exc))
        event, entry = store.label(entry_id, value, actor, expected)
        return {"seq": store.seq, "event_seq": event.seq, "entry": _entry_json(store, entry)}

    @app.post("/api/entries/{entry_id}/verdict")
    def verdict(entry_id: str, body: dict = Body(...)):
        try:
            actor = _actor(body)
            expected = _expected_seq(body)
            value = body.get("verdict")
            if value not in VERDICTS:
                raise ValueError(f"verdict must be one of {sorted(VERDICTS)}")
        except ValueError as exc:
            return bad(str(exc))
        event, entry = store.verdict(entry_id, value, actor, expected)
        return {"seq": store.seq, "event_seq": event.seq, "entry": _entry_json(store, entry)}

    @app.post("/api/entries/{entry_id}/edit")
    def edit(entry_id: str, body: dict = Body(...)):
        try:
            actor = _actor(body)
            expected = _expected_seq(body)
            kind = body.get("kind")
            if kind not in EDIT_KINDS:
                raise ValueError(f"kind must be one of {EDIT_KINDS}")
            after = body.get("after")
            if kind == "manual" and (not isinstance(after, str) or not after.strip()):
                raise ValueError("manual edit requires a non-empty after")
        except ValueError as exc:
            return bad(str(exc))
        try:
            event, entry = store.edit(entry_id, kind, actor, after=after, expected_seq=expected)
        except (NothingToStrip, NotArTagged) as exc:
            return bad(str(exc))
        return {"seq": store.seq, "event_seq": event.seq, "entry": _entry_json(store, entry)}

    @app.get("/api/stats")
    def stats():
        summary = stats_mod.pipeline_summary(store.entries, store.corpus_stats)
        payload = {
            "seq": store.seq,
            "states": store.state_counts(),
            "summary": stats_mod.summary_rows_json(summary),
            "distribution": None,
        }
        try:
            dist = stats_mod.distribution(store.entries, tagset=store.tagset)
        except EmptyDistribution:
            return payload
        payload["distribution"] = {
            "total": dist.total,
            "rows": [
                {
                    "pos": r.code,
                    "count": r.count,
                    "percentage": r.percentage,
                    "percentage_display": r.percentage_display,
                    "rank": r.rank,
                    "percentile": r.percentile,
                    "percentile_display": r.percentile_display,
                }
                for r in dist.rows
            ],
        }
        return payload

    @app.get("/api/export/{list_name}")
    def export(list_name: str):
        lists = review_mod.partition_lists(store.entries)
        if list_name not in lists:
            return JSONResponse(status_code=404, content={"error": f"unknown list {list_name!r}"})
        data = review_mod.list_csv(lists[list_name])
        return Response(
            content=data,
            media_type="text/csv; charset=utf-8",
            headers={"Content-Disposition": f'attachment; filename="{list_name}.csv"'},
        )

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
