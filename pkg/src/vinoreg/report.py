"""
Coefficient tables and share-chart data in the layout of the study.

Tables print each coefficient to three decimals with significance stars and
the standard error in parentheses.  The default star convention marks the
*most* significant results with a single star; ``StarConvention.CONVENTIONAL``
gives the usual ordering.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

import numpy as np
from scipy.stats import norm

from .estimator.model import FitResult
from .features import DegeneratePeriodError, Measure, export_shares
from .panel import Panel, reassign_north_africa


class StarConvention(enum.Enum):
    """Significance marks keyed by two-sided p-value thresholds."""

    PAPER = ((0.01, "*"), (0.05, "**"), (0.10, "***"))
    CONVENTIONAL = ((0.01, "***"), (0.05, "**"), (0.10, "*"))

    def stars(self, p: float) -> str:
        if p is None or not math.isfinite(p):
            return ""
        for threshold, mark in self.value:
            if p < threshold:
                return mark
        return ""

    def note(self) -> str:
        marks = ", ".join(f"{mark} p<{t:.2f}" for t, mark in self.value)
        return f"Standard errors in parentheses; two-sided normal p-values: {marks}."


LABELS = {
    "const": "Constant",
    "NIRW_x_OW": "NIRW x OW",
    "NIRW_x_NW": "NIRW x NW",
    "NIRW_x_LNW": "NIRW x LNW",
    "NIRW_x_ANW": "NIRW x ANW",
    "EU68-98": "EU 68-98",
    "EURO99-05": "EURO 99-05",
    "CHRIST_RULER": "CHRIST RULER",
    "MUSLIM_RULER": "MUSLIM RULER",
    "DISTLAT3050": "DIST LAT3050",
    "AVERAGE_TEMP": "AVERAGE TEMP",
}

FORMATS = ("text", "markdown", "csv")


def label(name: str) -> str:
    return LABELS.get(name, name)


def _num(x: float) -> str:
    s = f"{x:.3f}"
    return "0.000" if s == "-0.000" else s


def two_sided_p(coef: float, se: float) -> float:
    if not (math.isfinite(coef) and math.isfinite(se)) or se <= 0:
        return float("nan")
    return float(2.0 * norm.sf(abs(coef / se)))


def format_cell(coef: float, se: float, convention: StarConvention = StarConvention.PAPER,
                p: float | None = None) -> str:
    """``"-0.019* (0.007)"``; stars come from ``p`` or, if omitted, from coef/se."""
    if p is None:
        p = two_sided_p(coef, se)
    se_text = _num(se) if math.isfinite(se) else "n/a"
    return f"{_num(coef)}{convention.stars(p)} ({se_text})"


def _as_list(results) -> list[FitResult]:
    if isinstance(results, FitResult):
        return [results]
    out = list(results)
    if not out:
        raise ValueError("need at least one result")
    return out


def _row_names(results: Sequence[FitResult]) -> list[str]:
    order = []
    for r in results:
        for n in r.names[1:]:
            if n not in order:
                order.append(n)
    return order


def _table_rows(results: Sequence[FitResult], convention: StarConvention):
    """(label, per-result (coef, se, stars) or None) rows plus summary rows."""
    body = []
    for name in _row_names(results) + ["const"]:
        cells = []
        for r in results:
            if name in r.names:
                b, s = r.coef(name), r.stderr(name)
                cells.append((b, s, convention.stars(two_sided_p(b, s))))
            else:
                cells.append(None)
        body.append((label(name), cells))
    for key, title in (("sigma_alpha", "sigma_alpha"), ("sigma_eps", "sigma_eps")):
        body.append((title, [(getattr(r, key), getattr(r, "se_" + key), "") for r in results]))
    summary = [
        ("Log-likelihood", [f"{r.loglik:.3f}" for r in results]),
        ("Observations", [str(r.n_obs) for r in results]),
        ("Censored", [str(r.n_censored) for r in results]),
    ]
    return body, summary


def _cell_text(cell) -> str:
    if cell is None:
        return ""
    b, s, stars = cell
    se_text = _num(s) if math.isfinite(s) else "n/a"
    return f"{_num(b)}{stars} ({se_text})"


def render_table(results, convention: StarConvention = StarConvention.PAPER,
                 fmt: str = "text", headers: Sequence[str] | None = None) -> str:
    """Side-by-side coefficient table for one or more fits.

    Regressors follow the order of the fitted names, which is the order of
    the published tables, followed by the constant, both dispersion
    parameters and fit summaries.

    Raises
    ------
    ValueError
        Unknown ``fmt`` or an unconverged result.
    """
    if fmt not in FORMATS:
        raise ValueError(f"unknown table format {fmt!r}; choose from {', '.join(FORMATS)}")
    results = _as_list(results)
    if not all(r.converged for r in results):
        raise ValueError("cannot render an unconverged fit")
    headers = list(headers) if headers is not None else [f"({k + 1})" for k in range(len(results))]
    if len(headers) != len(results):
        raise ValueError("one header per result is required")
    body, summary = _table_rows(results, convention)

    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["variable"]
        for k in range(len(headers)):
            cols += [f"coef_{k + 1}", f"se_{k + 1}", f"stars_{k + 1}"]
        w.writerow(cols)
        for name, cells in body:
            row = [name]
            for cell in cells:
                row += ["", "", ""] if cell is None else [repr(float(cell[0])), repr(float(cell[1])), cell[2]]
            w.writerow(row)
        for name, values in summary:
            row = [name]
            for v in values:
                row += [v, "", ""]
            w.writerow(row)
        return buf.getvalue()

    rows = [(name, [_cell_text(c) for c in cells]) for name, cells in body] + summary
    if fmt == "markdown":
        lines = ["| Variable | " + " | ".join(headers) + " |",
                 "|---|" + "---:|" * len(headers)]
        lines += [f"| {name} | " + " | ".join(cells) + " |" for name, cells in rows]
        lines += ["", convention.note()]
        return "\n".join(lines) + "\n"

    width0 = max(len(name) for name, _ in rows)
    widths = [max(len(headers[j]), *(len(cells[j]) for _, cells in rows)) for j in range(len(headers))]
    def line(name, cells):
        return "  ".join([name.ljust(width0)] + [c.rjust(w) for c, w in zip(cells, widths)]).rstrip()
    out = [line("", headers)]
    out += [line(name, cells) for name, cells in rows]
    out += ["", convention.note()]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# chart data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShareSeries:
    label: str
    periods: tuple[str, ...]
    values: tuple[float, ...]


EXPORT_GROUPS = ("OW", "NW", "RW")


def _group_sum(panel: Panel, matrix: np.ndarray, group: str) -> np.ndarray:
    rows = [i for i, c in enumerate(panel.countries) if c.world.group == group]
    return matrix[rows].sum(axis=0)


def emit_chart_data(panel: Panel, measure=Measure.VOLUME, north_africa_to_ow: bool = False
                    ) -> list[ShareSeries]:
    """Group export shares, the RW import share and optionally OW with North Africa.

    The OW, NW and RW export series partition world exports in every period.

    Raises
    ------
    DegeneratePeriodError
        If world exports or imports are zero in some period.
    """
    measure = Measure.parse(measure)
    labels = tuple(p.label for p in panel.periods)
    shares = export_shares(panel, measure)
    series = [ShareSeries(g, labels, tuple(float(v) for v in _group_sum(panel, shares, g)))
              for g in EXPORT_GROUPS]
    imports = panel.matrix(f"import_{measure.suffix}")
    totals = imports.sum(axis=0)
    bad = [p for p, t in zip(labels, totals) if not t > 0.0]
    if bad:
        raise DegeneratePeriodError(f"world imports are zero in period(s) {', '.join(bad)}")
    rw_imports = _group_sum(panel, imports, "RW") / totals
    series.append(ShareSeries("RW imports", labels, tuple(float(v) for v in rw_imports)))
    if north_africa_to_ow:
        moved = reassign_north_africa(panel)
        ow_na = _group_sum(moved, export_shares(moved, measure), "OW")
        series.append(ShareSeries("OW+NA", labels, tuple(float(v) for v in ow_na)))
    return series


def write_chart_csv(series: Iterable[ShareSeries], path) -> None:
    series = list(series)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["period"] + [s.label for s in series])
        for j, period in enumerate(series[0].periods):
            w.writerow([period] + [repr(s.values[j]) for s in series])


_COLOURS = ("#1b5e20", "#b71c1c", "#0d47a1", "#6a1b9a", "#e65100")


def chart_svg(series: Iterable[ShareSeries], title: str = "") -> str:
    """Standalone SVG line chart, one polyline per series, shares on a 0-1 axis."""
    series = list(series)
    width, height = 640, 400
    left, right, top, bottom = 60, 150, 40, 50
    pw, ph = width - left - right, height - top - bottom
    n = len(series[0].periods)

    def x(j):
        return left + (pw * j / (n - 1) if n > 1 else pw / 2)

    def y(v):
        return top + ph * (1.0 - v)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left}" y="24" font-family="sans-serif" font-size="14">{escape(title)}</text>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        parts.append(f'<text x="{left - 8}" y="{y(tick) + 4:.1f}" font-family="sans-serif" '
                     f'font-size="10" text-anchor="end">{tick:.2f}</text>')
    for j, period in enumerate(series[0].periods):
        parts.append(f'<text x="{x(j):.1f}" y="{top + ph + 18}" font-family="sans-serif" '
                     f'font-size="10" text-anchor="middle">{period}</text>')
    for k, s in enumerate(series):
        colour = _COLOURS[k % len(_COLOURS)]
        points = " ".join(f"{x(j):.1f},{y(v):.1f}" for j, v in enumerate(s.values))
        parts.append(f'<polyline fill="none" stroke="{colour}" stroke-width="2" points="{points}"/>')
        ly = top + 16 * k + 8
        parts.append(f'<line x1="{left + pw + 15}" y1="{ly}" x2="{left + pw + 35}" y2="{ly}" '
                     f'stroke="{colour}" stroke-width="2"/>')
        parts.append(f'<text x="{left + pw + 40}" y="{ly + 4}" font-family="sans-serif" '
                     f'font-size="11">{escape(s.label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_chart_svg(series: Iterable[ShareSeries], path, title: str = "") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(chart_svg(series, title))
