"""CSV and SVG writers for sweep rows."""

from __future__ import annotations

import csv
import math
from html import escape
from pathlib import Path

from .errors import InvalidArgument
from .sweep import ROW_FIELDS, SweepRow

_BOOL_FIELDS = {"good_cavity", "below_saturation", "cooling_regime"}
_OPTIONAL_FIELDS = {"eta", "n_mean", "n_sat", "g2", "g4", "sz0"}


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else ""
    return str(value)


def write_csv(rows, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(ROW_FIELDS)
    for row in rows:
        writer.writerow([_cell(getattr(row, name)) for name in ROW_FIELDS])


def emit_csv(rows, path) -> Path:
    """Write rows with a header line; undefined values are empty fields."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write_csv(rows, fh)
    return path


def read_csv(path) -> list[SweepRow]:
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != ROW_FIELDS:
            raise InvalidArgument(f"unexpected CSV header {reader.fieldnames}")
        for rec in reader:
            kw = {}
            for name in ROW_FIELDS:
                raw = rec[name]
                if name in _BOOL_FIELDS:
                    kw[name] = raw == "true"
                elif name == "mode":
                    kw[name] = raw
                elif name in _OPTIONAL_FIELDS and raw == "":
                    kw[name] = None
                else:
                    kw[name] = float(raw)
            rows.append(SweepRow(**kw))
    return rows


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def emit_svg(rows, path, y="n_mean", x="delta_omega_hz", width=800, height=500, log_y=False) -> Path:
    """Self-contained line plot, one polyline per (n_bar, j) series."""
    rows = list(rows)
    if not rows:
        raise InvalidArgument("no rows to plot")
    if y not in ROW_FIELDS or y in _BOOL_FIELDS or y == "mode":
        raise InvalidArgument(f"cannot plot column {y!r}")

    series = {}
    for row in rows:
        series.setdefault((row.n_bar, row.j), []).append(row)

    def yval(row):
        v = getattr(row, y)
        if v is None or not math.isfinite(v) or (log_y and v <= 0):
            return None
        return math.log10(v) if log_y else v

    xs = [getattr(r, x) for r in rows]
    ys = [v for v in (yval(r) for r in rows) if v is not None]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5

    left, right, top, bottom = 80, 160, 30, 60
    pw, ph = width - left - right, height - top - bottom

    def sx(v):
        return left + (v - x_lo) / (x_hi - x_lo) * pw

    def sy(v):
        return top + ph - (v - y_lo) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for t in _ticks(x_lo, x_hi):
        out.append(f'<line x1="{sx(t):.2f}" y1="{top + ph}" x2="{sx(t):.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{sx(t):.2f}" y="{top + ph + 18}" text-anchor="middle">{t:.4g}</text>')
    for t in _ticks(y_lo, y_hi):
        label = f"1e{t:.2g}" if log_y else f"{t:.4g}"
        out.append(f'<line x1="{left - 5}" y1="{sy(t):.2f}" x2="{left}" y2="{sy(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{sy(t) + 4:.2f}" text-anchor="end">{label}</text>')
    out.append(f'<text class="xlabel" x="{left + pw / 2}" y="{height - 15}" text-anchor="middle">'
               f'{escape(x)}</text>')
    out.append(f'<text class="ylabel" x="20" y="{top + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 20 {top + ph / 2})">{escape(y)}{" (log10)" if log_y else ""}</text>')

    for k, ((n_bar, j), srows) in enumerate(series.items()):
        color = _COLORS[k % len(_COLORS)]
        pts = " ".join(
            f"{sx(getattr(r, x)):.2f},{sy(v):.2f}" for r in srows if (v := yval(r)) is not None
        )
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = top + 15 + 18 * k
        out.append(f'<line x1="{left + pw + 10}" y1="{ly}" x2="{left + pw + 30}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 35}" y="{ly + 4}">n_bar={n_bar:g}, j={j:g}</text>')
    out.append("</svg>")

    path = Path(path)
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path
