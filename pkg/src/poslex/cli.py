"""Command-line orchestrator. One subcommand per pipeline stage.

Exit codes: 0 success, 1 domain error (stage out of order, bad data),
2 usage error (click's own).
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click

from . import __version__
from . import corpus as corpus_mod
from . import lexicon as lexicon_mod
from . import review as review_mod
from . import stats as stats_mod
from . import translate as translate_mod
from .config import PipelineConfig, load_config
from .errors import PoslexError, StageError
from .model import load_tagset
from .project import ProjectStore, utc_now


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def domain_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except PoslexError as exc:
            _fail(str(exc))

    return wrapper


def common_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(exists=True), default=None,
                      help="key = value config file")(fn)
    fn = click.option("--project", "-p", "project_dir", default=None, help="project directory")(fn)
    return fn


def build_config(config_path, **overrides) -> PipelineConfig:
    return load_config(config_path, overrides=overrides)


def open_project(cfg: PipelineConfig) -> ProjectStore:
    return ProjectStore.open(cfg.project_dir)


@click.group()
@click.version_option(version=__version__, prog_name="poslex")
def main():
    """Build a reviewed, POS-tagged lexicon from a tagged source corpus."""


@main.command()
@common_options
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), default=None,
              help="tagged corpus, one surface<DELIM>tag per line")
@click.option("--delimiter", type=click.Choice(["auto", "tab", "space"]), default=None)
@click.option("--tagset", "tagset_path", type=click.Path(exists=True), default=None,
              help="tag catalog JSON (defaults to the bundled one)")
@click.option("--src-lang", default=None)
@click.option("--dst-lang", default=None)
@domain_errors
def ingest(config_path, project_dir, corpus_path, delimiter, tagset_path, src_lang, dst_lang):
    """Parse and deduplicate the corpus into a fresh project."""
    cfg = build_config(config_path, project_dir=project_dir, corpus=corpus_path,
                       delimiter=delimiter, tagset=tagset_path, src_lang=src_lang, dst_lang=dst_lang)
    root = Path(cfg.project_dir)
    if (root / "project.json").exists():
        store = ProjectStore.open(root)
        if store.entries:
            click.echo(f"already ingested: {len(store.entries)} entries in {root}")
            return
    else:
        tagset = load_tagset(cfg.tagset) if cfg.tagset else None
        store = ProjectStore.init(
            root,
            tagset=tagset,
            languages={"src": cfg.src_lang, "dst": cfg.dst_lang},
            strip_pronouns=cfg.pronoun_list(),
        )
    if not cfg.corpus:
        _fail("no corpus file given (--corpus)")
    data = Path(cfg.corpus).read_bytes()
    fmt = corpus_mod.CorpusFormat(delimiter=cfg.delimiter, comment_prefix=cfg.comment_prefix)
    result = store.ingest(data, fmt)
    click.echo(
        f"ingested {result['token_count']} tokens "
        f"({result['quarantined_count']} quarantined) "
        f"into {result['deduped_count']} entries"
    )


def _make_backend(cfg: PipelineConfig) -> translate_mod.TranslatorBackend:
    if cfg.backend == "stub":
        dictionary = translate_mod.load_dictionary(cfg.dictionary) if cfg.dictionary else {}
        return translate_mod.StubBackend(dictionary, cfg.miss_policy)
    if cfg.backend == "http":
        if not cfg.backend_url:
            raise StageError("http backend needs backend_url (or POSLEX_BACKEND_URL)")
        return translate_mod.HttpBackend(cfg.backend_url, api_key=cfg.backend_key)
    raise StageError(f"unknown backend {cfg.backend!r}")


@main.command()
@common_options
@click.option("--backend", type=click.Choice(["stub", "http"]), default=None)
@click.option("--dictionary", type=click.Path(exists=True), default=None,
              help="source<TAB>target dictionary for the stub backend")
@click.option("--miss-policy", type=click.Choice(["echo", "fail"]), default=None)
@click.option("--backend-url", default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--max-in-flight", type=int, default=None)
@click.option("--retries", type=int, default=None)
@click.option("--rate-per-sec", type=float, default=None)
@domain_errors
def translate(config_path, project_dir, backend, dictionary, miss_policy, backend_url,
              batch_size, max_in_flight, retries, rate_per_sec):
    """Machine-translate every deduped entry (resumes from the cache)."""
    cfg = build_config(config_path, project_dir=project_dir, backend=backend, dictionary=dictionary,
                       miss_policy=miss_policy, backend_url=backend_url, batch_size=batch_size,
                       max_in_flight=max_in_flight, retries=retries, rate_per_sec=rate_per_sec)
    root = Path(cfg.project_dir)
    if not (root / "project.json").exists():
        _fail("no deduped entries (run ingest first)")
    store = ProjectStore.open(root)
    tcfg = translate_mod.TranslateConfig(
        batch_size=cfg.batch_size,
        max_in_flight=cfg.max_in_flight,
        retries=cfg.retries,
        rate_per_sec=cfg.rate_per_sec,
    )
    result = store.translate(_make_backend(cfg), tcfg)
    click.echo(
        f"translated: {result.translated_count}/{len(result.entries)} entries "
        f"({result.backend_calls} backend calls, {result.cache_hits} cache hits, "
        f"{len(result.failures)} failures)"
    )
    for failure in result.failures[:10]:
        click.echo(f"  unresolved: {failure.source_form} ({failure.reason})", err=True)


@main.command("triage-export")
@common_options
@click.option("--out", "-o", type=click.Path(), default=None,
              help="output file (default exports/triage.csv)")
@domain_errors
def triage_export(config_path, project_dir, out):
    """Write the pending triage queue as a CSV sheet to fill in."""
    cfg = build_config(config_path, project_dir=project_dir)
    store = open_project(cfg)
    pending = review_mod.triage_queue(store.entries)
    if not pending:
        _fail("no translated entries to triage")
    path = Path(out) if out else store.exports_dir / "triage.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(review_mod.triage_export_csv(store.entries))
    click.echo(f"wrote {len(pending)} rows to {path}")


@main.command("triage-import")
@common_options
@click.option("--file", "-f", "sheet", type=click.Path(exists=True), required=True)
@click.option("--actor", default=None)
@domain_errors
def triage_import(config_path, project_dir, sheet, actor):
    """Apply labels from a filled-in triage sheet (all rows or none)."""
    cfg = build_config(config_path, project_dir=project_dir, actor=actor)
    store = open_project(cfg)
    rows = review_mod.parse_triage_csv(Path(sheet).read_bytes(), store.ids())
    if not rows:
        click.echo("sheet has no filled-in labels, nothing to do")
        return
    before_flags = sum(1 for e in store.entries if e.source_repeat)
    applied = store.triage_import(rows, cfg.actor)
    store.save_snapshot()
    flagged = sum(1 for e in store.entries if e.source_repeat) - before_flags
    click.echo(f"applied {applied} labels" + (f", flagged {flagged} repeated source entries" if flagged else ""))


@main.command()
@common_options
@click.option("--export-sheet", type=click.Path(), default=None,
              help="write the pending review queue as a CSV sheet")
@click.option("--import-sheet", type=click.Path(exists=True), default=None,
              help="apply verdicts from a filled-in sheet (all rows or none)")
@click.option("--export-lists", is_flag=True, default=False,
              help="write the six decision lists under exports/")
@click.option("--actor", default=None)
@domain_errors
def review(config_path, project_dir, export_sheet, import_sheet, export_lists, actor):
    """Tag-accuracy review: sheet round-trip and list export."""
    cfg = build_config(config_path, project_dir=project_dir, actor=actor)
    store = open_project(cfg)
    did_something = False
    if export_sheet:
        pending = review_mod.review_queue(store.entries)
        if not pending:
            _fail("no correct-labeled entries to review")
        path = Path(export_sheet)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(review_mod.review_export_csv(store.entries))
        click.echo(f"wrote {len(pending)} rows to {path}")
        did_something = True
    if import_sheet:
        rows = review_mod.parse_review_csv(Path(import_sheet).read_bytes(), store.ids())
        if rows:
            applied = store.review_import(rows, cfg.actor)
            store.save_snapshot()
            click.echo(f"applied {applied} verdicts")
        else:
            click.echo("sheet has no filled-in verdicts, nothing to do")
        did_something = True
    if export_lists:
        for path in store.write_exports():
            click.echo(f"wrote {path}")
        did_something = True
    if not did_something:
        pending = review_mod.review_queue(store.entries)
        click.echo(f"{len(pending)} entries waiting for review")


@main.command("collapse-repeats")
@common_options
@click.option("--actor", default=None)
@domain_errors
def collapse_repeats(config_path, project_dir, actor):
    """Demote duplicate-translation entries to a repeated verdict."""
    cfg = build_config(config_path, project_dir=project_dir, actor=actor)
    store = open_project(cfg)
    plan = store.collapse_repeats(cfg.actor or "system")
    store.save_snapshot()
    demoted = sum(len(losers) for _, losers in plan)
    click.echo(f"collapsed {len(plan)} duplicate groups, demoted {demoted} entries")


@main.command()
@common_options
@click.option("--no-write", is_flag=True, default=False, help="print the summary only")
@domain_errors
def stats(config_path, project_dir, no_write):
    """Print pipeline progress; write report and chart files when possible."""
    cfg = build_config(config_path, project_dir=project_dir)
    store = open_project(cfg)
    rows = stats_mod.pipeline_summary(store.entries, store.corpus_stats)
    click.echo(stats_mod.summary_text(rows), nl=False)
    if no_write:
        return
    try:
        dist = stats_mod.distribution(store.entries, tagset=store.tagset)
    except PoslexError:
        return
    store.exports_dir.mkdir(exist_ok=True)
    outputs = {
        "report.csv": stats_mod.report_csv(dist),
        "report.json": stats_mod.report_json(dist, generated_at=utc_now()),
        "tags-pie.svg": stats_mod.svg_pie(dist),
        "percentile-bars.svg": stats_mod.svg_percentile_bars(dist),
    }
    for name, data in outputs.items():
        path = store.exports_dir / name
        path.write_bytes(data)
        click.echo(f"wrote {path}")


@main.command("export-lexicon")
@common_options
@click.option("--format", "fmt", type=click.Choice(["tsv", "csv", "json"]), default="tsv")
@click.option("--out", "-o", type=click.Path(), default=None)
@domain_errors
def export_lexicon(config_path, project_dir, fmt, out):
    """Write the final lexicon (accurate entries only)."""
    cfg = build_config(config_path, project_dir=project_dir)
    store = open_project(cfg)
    emit = {"tsv": lexicon_mod.lexicon_tsv, "csv": lexicon_mod.lexicon_csv, "json": lexicon_mod.lexicon_json}[fmt]
    data = emit(store.entries, __version__, utc_now())
    path = Path(out) if out else store.exports_dir / f"lexicon.{fmt}"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    rows = sum(1 for line in data.decode("utf-8").splitlines() if line and not line.startswith("#"))
    click.echo(f"wrote {path} ({rows} rows)")


@main.command()
@common_options
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--token", default=None, help="require this bearer token on /api/*")
@click.option("--static", "static_dir", type=click.Path(), default=None,
              help="serve these files at / (the built browser UI)")
@domain_errors
def serve(config_path, project_dir, host, port, token, static_dir):
    """Serve the annotation API (and optionally the browser UI)."""
    import uvicorn

    from .api import create_app

    cfg = build_config(config_path, project_dir=project_dir, host=host, port=port, token=token)
    store = open_project(cfg)
    app = create_app(store, token=cfg.token, static_dir=static_dir)
    click.echo(f"serving project {cfg.project_dir} on http://{cfg.host}:{cfg.port}")
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="warning")


if __name__ == "__main__":
    main()
