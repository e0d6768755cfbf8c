"""Tag-distribution report and pipeline progress summary.

Counts come from lexicon entries (one entry each), never from corpus
frequencies. Percentile is the min-rank of a tag's count, ascending, over
the full catalog row set; display rounding is fixed here and nowhere else.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

from .errors import EmptyDistribution
from .model import (
    AR_TAG,
    LABELED_CORRECT,
    LABELED_NOT_CORRECT,
    LABELED_UNDECIDED,
    REVIEW_STATES,
    REVIEWED_ACCURATE,
    REVIEWED_CONCERNED,
    REVIEWED_REPEATED,
    STAGE_RANK,
    TRANSLATED,
    LexiconEntry,
    TagSet,
)


def pct4(x: Decimal) -> str:
    """Percentage display: 4 decimal places, round half up."""
    return format(x.quantize(Decimal("0.0001"), rounding=ROUND_HALF_UP), "f")


def sig1(x: Decimal) -> str:
    """Percentile display: 1 significant figure, round half up."""
    if x == 0:
        return "0"
    exp = x.adjusted()
    q = Decimal(1).scaleb(exp)
    r = x.quantize(q, rounding=ROUND_HALF_UP)
    if r.adjusted() > exp:
        # rounding carried into the next magnitude (0.95 -> 1)
        r = r.quantize(Decimal(1).scaleb(r.adjusted()), rounding=ROUND_HALF_UP)
    return format(r.normalize(), "f")


@dataclass(frozen=True)
class DistRow:
    code: str
    count: int
    percentage: float
    percentage_display: str
    rank: int | None
    percentile: float | None
    percentile_display: str


@dataclass(frozen=True)
class TagDistribution:
    rows: tuple[DistRow, ...]
    total: int

    @property
    def tag_count(self) -> int:
        return sum(1 for r in self.rows if r.count > 0)

    def row(self, code: str) -> DistRow:
        for r in self.rows:
            if r.code == code:
                return r
        raise KeyError(code)


def _counts_from(source, tagset: TagSet | None) -> dict[str, int]:
    counts: dict[str, int] = {}
    if tagset is not None:
        counts = {code: 0 for code in tagset.codes()}
    for item in source:
        if isinstance(item, LexiconEntry):
            if item.state != REVIEWED_ACCURATE:
                continue
            counts[item.tag] = counts.get(item.tag, 0) + 1
        else:
            code, n = item
            counts[code] = counts.get(code, 0) + int(n)
    return counts


def distribution(source, tagset: TagSet | None = None) -> TagDistribution:
    """Build the per-tag report from accurate entries or raw (tag, count) pairs.

    With a catalog, every catalog tag gets a row; zero-count rows widen the
    percentile denominator but are excluded from ranking.
    """
    counts = _counts_from(source, tagset)
    total = sum(counts.values())
    if total <= 0:
        raise EmptyDistribution("no nonzero tag counts")

    row_count = len(counts)
    nonzero = sorted(c for c in counts.values() if c > 0)
    # min-rank, ascending by count: rank of c = 1 + number of strictly smaller counts
    rank_of: dict[int, int] = {}
    for i, c in enumerate(nonzero):
        if c not in rank_of:
            rank_of[c] = i + 1

    rows = []
    for code in sorted(counts):
        count = counts[code]
        pct = Decimal(count) / Decimal(total)
        if count > 0:
            rank = rank_of[count]
            pctl = Decimal(rank) / Decimal(row_count)
            row = DistRow(
                code=code,
                count=count,
                percentage=float(pct),
                percentage_display=pct4(pct),
                rank=rank,
                percentile=float(pctl),
                percentile_display=sig1(pctl),
            )
        else:
            row = DistRow(code, 0, 0.0, pct4(Decimal(0)), None, None, "")
        rows.append(row)
    return TagDistribution(rows=tuple(rows), total=total)


REPORT_COLUMNS = ["pos", "count", "percentage", "percentage_display", "rank", "percentile", "percentile_display"]


def report_csv(dist: TagDistribution) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in dist.rows:
        w.writerow([
            r.code,
            r.count,
            repr(r.percentage),
            r.percentage_display,
            "" if r.rank is None else r.rank,
            "" if r.percentile is None else repr(r.percentile),
            r.percentile_display,
        ])
    return buf.getvalue().encode("utf-8")


def report_json(dist: TagDistribution, generated_at: str) -> bytes:
    doc = {
        "total": dist.total,
        "generated_at": generated_at,
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
    return (json.dumps(doc, ensure_ascii=False, sort_keys=True, indent=1) + "\n").encode("utf-8")


def _slice_color(i: int, n: int) -> str:
    hue = (i * 360.0) / max(n, 1)
    return f"hsl({hue:.1f}, 62%, 52%)"


def svg_pie(dist: TagDistribution) -> bytes:
    """Pie of nonzero tag counts, largest slice first, plus a legend."""
    rows = sorted((r for r in dist.rows if r.count > 0), key=lambda r: (-r.count, r.code))
    cx, cy, radius = 210.0, 230.0, 170.0
    legend_w = 170
    width = int(cx * 2) + legend_w
    height = max(int(cy * 2), 40 + 16 * len(rows))
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
        f'<title>tag distribution, {dist.total} entries</title>',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    if len(rows) == 1:
        r = rows[0]
        out.append(
            f'<circle cx="{cx}" cy="{cy}" r="{radius}" fill="{_slice_color(0, 1)}" '
            f'data-tag="{r.code}" data-count="{r.count}" data-angle="360.000"/>'
        )
    else:
        angle = -90.0  # 12 o'clock, clockwise
        for i, r in enumerate(rows):
            sweep = r.count * 360.0 / dist.total
            a0 = math.radians(angle)
            a1 = math.radians(angle + sweep)
            x0, y0 = cx + radius * math.cos(a0), cy + radius * math.sin(a0)
            x1, y1 = cx + radius * math.cos(a1), cy + radius * math.sin(a1)
            large = 1 if sweep > 180.0 else 0
            out.append(
                f'<path d="M{cx:.3f},{cy:.3f} L{x0:.3f},{y0:.3f} '
                f'A{radius:.3f},{radius:.3f} 0 {large} 1 {x1:.3f},{y1:.3f} Z" '
                f'fill="{_slice_color(i, len(rows))}" stroke="white" stroke-width="1" '
                f'data-tag="{r.code}" data-count="{r.count}" data-angle="{sweep:.3f}"/>'
            )
            angle += sweep
    lx = int(cx * 2) + 10
    for i, r in enumerate(rows):
        ly = 30 + 16 * i
        out.append(f'<rect x="{lx}" y="{ly - 10}" width="12" height="12" fill="{_slice_color(i, len(rows))}"/>')
        out.append(f'<text x="{lx + 18}" y="{ly}" font-size="12">{r.code} ({r.count})</text>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def svg_percentile_bars(dist: TagDistribution) -> bytes:
    """One bar per nonzero tag, bar height = percentile."""
    rows = [r for r in dist.rows if r.count > 0]
    bar_w, gap, chart_h = 18, 6, 300
    left, top, bottom = 40, 20, 70
    width = left + len(rows) * (bar_w + gap) + 20
    height = top + chart_h + bottom
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
        "<title>tag percentiles</title>",
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{left}" y1="{top + chart_h}" x2="{width - 10}" y2="{top + chart_h}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + chart_h}" stroke="black"/>',
    ]
    for frac in (0.25, 0.5, 0.75, 1.0):
        y = top + chart_h * (1 - frac)
        out.append(f'<text x="{left - 6}" y="{y + 4}" font-size="10" text-anchor="end">{frac:g}</text>')
        out.append(f'<line x1="{left - 3}" y1="{y}" x2="{left}" y2="{y}" stroke="black"/>')
    for i, r in enumerate(rows):
        h = chart_h * (r.percentile or 0.0)
        x = left + i * (bar_w + gap) + gap
        y = top + chart_h - h
        out.append(
            f'<rect x="{x:.2f}" y="{y:.3f}" width="{bar_w}" height="{h:.3f}" fill="hsl(210, 55%, 50%)" '
            f'data-tag="{r.code}" data-percentile="{r.percentile:.6f}"/>'
        )
        tx = x + bar_w / 2
        ty = top + chart_h + 8
        out.append(
            f'<text x="{tx:.2f}" y="{ty}" font-size="9" text-anchor="end" '
            f'transform="rotate(-60 {tx:.2f} {ty})">{r.code}</text>'
        )
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


@dataclass(frozen=True)
class SummaryRow:
    process: str
    input_name: str
    input_count: int
    outputs: tuple[tuple[str, int], ...]
    notes: tuple[str, ...] = ()


def pipeline_summary(entries: list[LexiconEntry], corpus_stats: dict) -> list[SummaryRow]:
    """Stage-by-stage entry flow, with rows only for stages that have run."""
    rows: list[SummaryRow] = []
    token_count = int(corpus_stats.get("token_count", 0))
    deduped = len(entries)
    if not corpus_stats and not entries:
        return rows
    rows.append(SummaryRow("Remove duplicates", "corpus tokens", token_count, (("deduped entries", deduped),)))
    rows.append(SummaryRow("Convert to CSV", "deduped entries", deduped, (("entry rows", deduped),)))

    translated_total = sum(1 for e in entries if STAGE_RANK[e.state] >= STAGE_RANK[TRANSLATED])
    if translated_total == 0:
        return rows
    rows.append(SummaryRow("Machine translation", "entry rows", deduped, (("translated rows", translated_total),)))

    by_state: dict[str, int] = {}
    for e in entries:
        by_state[e.state] = by_state.get(e.state, 0) + 1
    reviewed_total = sum(by_state.get(s, 0) for s in REVIEW_STATES)
    correct_total = by_state.get(LABELED_CORRECT, 0) + reviewed_total
    not_correct = by_state.get(LABELED_NOT_CORRECT, 0)
    undecided = by_state.get(LABELED_UNDECIDED, 0)
    if correct_total + not_correct + undecided == 0:
        return rows

    repeats = sum(1 for e in entries if e.source_repeat)
    ar_tagged = sum(
        1 for e in entries if e.tag == AR_TAG and STAGE_RANK[e.state] >= STAGE_RANK[TRANSLATED]
    )
    outputs = [("correct", correct_total), ("not-correct", not_correct), ("undecided", undecided)]
    if ar_tagged:
        outputs.append(("ar-tagged", ar_tagged))
    notes = (f"{repeats} repeated source entries",) if repeats else ()
    rows.append(SummaryRow("Evaluate the translated output", "translated rows", translated_total,
                           tuple(outputs), notes))

    if reviewed_total == 0:
        return rows
    review_input = correct_total - repeats
    rows.append(
        SummaryRow(
            "Evaluate the accuracy of tagging",
            "correct entries",
            review_input,
            (
                ("accurate", by_state.get(REVIEWED_ACCURATE, 0)),
                ("repeated", by_state.get(REVIEWED_REPEATED, 0)),
                ("concerned", by_state.get(REVIEWED_CONCERNED, 0)),
            ),
        )
    )
    return rows


def summary_rows_json(rows: list[SummaryRow]) -> list[dict]:
    return [
        {
            "process": r.process,
            "input": {"name": r.input_name, "count": r.input_count},
            "outputs": [{"name": n, "count": c} for n, c in r.outputs],
            "notes": list(r.notes),
        }
        for r in rows
    ]


def summary_text(rows: list[SummaryRow]) -> str:
    if not rows:
        return "nothing ingested yet\n"
    lines = []
    for r in rows:
        first = True
        for name, count in r.outputs:
            left = f"{r.process}  [{r.input_name}: {r.input_count:,}]" if first else ""
            lines.append(f"{left:<52} -> {name}: {count:,}")
            first = False
        for note in r.notes:
            lines.append(f"{'':<52}    note: {note}")
    return "\n".join(lines) + "\n"
