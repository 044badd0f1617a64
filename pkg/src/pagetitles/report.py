"""Plain-text tables and CSV exports in the layout of the published results."""
from __future__ import annotations

import csv
import enum
import io
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .classify import BucketRate
from .stats import ConfusionMatrix, DescriptiveStats, matrix_stats, round_percent


class Layout(str, enum.Enum):
    CONFUSION_TABLE = "ConfusionTable"
    SWEEP_CSV = "SweepCsv"
    BUCKET_TABLE = "BucketTable"
    HISTOGRAM_CSV = "HistogramCsv"
    STATS_BLOCK = "StatsBlock"


@dataclass(frozen=True)
class ReportTable:
    title: str
    layout: Layout
    body: str

    def __str__(self) -> str:
        return self.body


def _csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def fmt_float(x: float) -> str:
    return repr(float(x))


def render_confusion(m: ConfusionMatrix, title: str = "") -> ReportTable:
    """Predicted rows, actual columns, with mismatch/match totals at the side."""
    s = matrix_stats(m)
    rows = [
        ["", "", "Actual", "", "Total", "Percent"],
        ["", "", "found", "not found", "Mismatch", "Mismatch"],
        ["Predicted", "found", str(m.tp), str(m.fp), str(s.mismatch), str(s.percent_mismatch)],
        ["", "not found", str(m.fn), str(m.tn), "Match", "Match"],
        ["", "", "", "", str(s.match), f"{s.percent_match}%"],
    ]
    widths = [max(len(r[i]) for r in rows) for i in range(6)]
    lines = [title] if title else []
    lines += ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    return ReportTable(title, Layout.CONFUSION_TABLE, "\n".join(lines) + "\n")


_PRED_FOUND = re.compile(r"^Predicted\s+found\s+(\d+)\s+(\d+)\s+(\d+)\s+(\d+)\s*$")
_PRED_NOT = re.compile(r"^\s*not found\s+(\d+)\s+(\d+)\s+Match\s+Match\s*$")


def parse_confusion(body: str) -> ConfusionMatrix:
    """Recover the four counts from :func:`render_confusion` output."""
    tp = fp = fn = tn = None
    for line in body.splitlines():
        if m := _PRED_FOUND.match(line):
            tp, fp = int(m.group(1)), int(m.group(2))
        elif m := _PRED_NOT.match(line):
            fn, tn = int(m.group(1)), int(m.group(2))
    if None in (tp, fp, fn, tn):
        raise ValueError("not a rendered confusion table")
    return ConfusionMatrix(tp, fp, fn, tn)


SWEEP_HEADER = ("threshold", "tp", "fp", "fn", "tn", "match", "mismatch", "percent_match")


def render_sweep_csv(rows: Sequence[tuple[float, ConfusionMatrix]], title: str = "") -> ReportTable:
    body = _csv(SWEEP_HEADER, (
        (fmt_float(t), m.tp, m.fp, m.fn, m.tn, m.match, m.mismatch,
         fmt_float(100 * m.match / m.total) if m.total else "")
        for t, m in rows))
    return ReportTable(title, Layout.SWEEP_CSV, body)


def render_histogram_csv(bins: Sequence[tuple[float, int]], value_name: str, title: str = "") -> ReportTable:
    return ReportTable(title, Layout.HISTOGRAM_CSV, _csv((value_name, "count"), bins))


def render_bucket_table(rates: Sequence[BucketRate], title: str = "",
                        percent: Callable[[object], int] = round_percent) -> ReportTable:
    """Found/not-found per bucket with an integer percent.

    Per-word-count rows round; coarse length ranges are usually quoted
    truncated, so callers pick ``truncate_percent`` for those.
    """
    rows = [("words", "found", "notFound", "percentFound")]
    for r in rates:
        pct = f"{percent(r.fraction_found)}%" if r.total else "-"
        rows.append((r.label, str(r.found), str(r.not_found), pct))
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    lines = [title] if title else []
    lines += ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in rows]
    return ReportTable(title, Layout.BUCKET_TABLE, "\n".join(lines) + "\n")


def render_bucket_csv(rates: Sequence[BucketRate]) -> str:
    return _csv(("low", "high", "found", "not_found", "fraction_found"), (
        (r.low, r.high, r.found, r.not_found, fmt_float(r.fraction_found) if r.total else "")
        for r in rates))


def render_stats_block(named: Mapping[str, DescriptiveStats], title: str = "") -> ReportTable:
    lines = [title] if title else []
    for name, s in named.items():
        lines.append(f"{name}: n={s.n} mean={s.mean:.4f} std_dev={s.std_dev:.4f} "
                     f"min={s.min:g} max={s.max:g}")
    return ReportTable(title, Layout.STATS_BLOCK, "\n".join(lines) + "\n")
