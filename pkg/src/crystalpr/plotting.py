"""Deterministic SVG rendering of experiment CSVs.

Hand-rolled SVG so identical data produces byte-identical files: fixed canvas,
fixed fonts, no timestamps or generated ids.  Input CSVs may start with a
"# {json}" metadata line, which is skipped.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 28, 44
FONT = "font-family=\"monospace\" font-size=\"12\""


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def read_csv_table(path) -> tuple[dict | None, list[str], list[list[str]]]:
    """Parse a CSV with an optional '# json' metadata first line."""
    import json

    meta = None
    with open(path, newline="") as f:
        first = f.readline()
        if first.startswith("#"):
            meta = json.loads(first.lstrip("# "))
        else:
            f.seek(0)
        reader = csv.reader(f)
        rows = [row for row in reader if row]
    if not rows:
        return meta, [], []
    return meta, rows[0], rows[1:]


def _axes(title: str, xlabel: str, ylabel: str) -> list[str]:
    x0, y0 = MARGIN_L, HEIGHT - MARGIN_B
    x1, y1 = WIDTH - MARGIN_R, MARGIN_T
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
        f'<text x="{(x0 + x1) // 2}" y="{MARGIN_T - 10}" text-anchor="middle" {FONT}>{title}</text>',
        f'<text x="{(x0 + x1) // 2}" y="{HEIGHT - 8}" text-anchor="middle" {FONT}>{xlabel}</text>',
        f'<text x="14" y="{(y0 + y1) // 2}" text-anchor="middle" {FONT} '
        f'transform="rotate(-90 14 {(y0 + y1) // 2})">{ylabel}</text>',
    ]


def render_histogram(rows: list[tuple[float, float]], title: str = "",
                     xlabel: str = "value", ylabel: str = "count") -> str:
    """Bar chart of (value, count) rows."""
    parts = _axes(title, xlabel, ylabel)
    if rows:
        xs = [r[0] for r in rows]
        ys = [r[1] for r in rows]
        xmin, xmax = min(xs), max(xs)
        ymax = max(max(ys), 1)
        span = max(xmax - xmin, 1)
        plot_w = WIDTH - MARGIN_L - MARGIN_R
        plot_h = HEIGHT - MARGIN_T - MARGIN_B
        bar_w = max(plot_w / (span + 1) - 2, 1.0)
        for x, y in rows:
            px = MARGIN_L + (x - xmin) / (span + 1) * plot_w + 1
            h = y / ymax * plot_h
            py = HEIGHT - MARGIN_B - h
            parts.append(
                f'<rect x="{_fmt(px)}" y="{_fmt(py)}" width="{_fmt(bar_w)}" '
                f'height="{_fmt(h)}" fill="steelblue"/>'
            )
        parts.append(
            f'<text x="{MARGIN_L - 6}" y="{MARGIN_T + 12}" text-anchor="end" {FONT}>{ymax:g}</text>'
        )
        parts.append(
            f'<text x="{MARGIN_L}" y="{HEIGHT - MARGIN_B + 16}" text-anchor="middle" {FONT}>{xmin:g}</text>'
        )
        parts.append(
            f'<text x="{WIDTH - MARGIN_R}" y="{HEIGHT - MARGIN_B + 16}" text-anchor="end" {FONT}>{xmax:g}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_line(points: list[tuple[float, float]], title: str = "", xlabel: str = "x",
                ylabel: str = "y", log_y: bool = False) -> str:
    """Polyline with markers through (x, y) points, optionally log-scale in y."""
    parts = _axes(title, xlabel, ylabel)
    pts = [(x, y) for x, y in points if not log_y or y > 0]
    if pts:
        xs = [p[0] for p in pts]
        ys = [math.log10(p[1]) if log_y else p[1] for p in pts]
        xmin, xmax = min(xs), max(xs)
        ymin, ymax = min(ys), max(ys)
        xspan = xmax - xmin or 1.0
        yspan = ymax - ymin or 1.0
        plot_w = WIDTH - MARGIN_L - MARGIN_R
        plot_h = HEIGHT - MARGIN_T - MARGIN_B

        def to_px(x, y):
            return (MARGIN_L + (x - xmin) / xspan * plot_w,
                    HEIGHT - MARGIN_B - (y - ymin) / yspan * plot_h)

        coords = [to_px(x, y) for x, y in zip(xs, ys)]
        path = " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in coords)
        parts.append(f'<polyline points="{path}" fill="none" stroke="crimson" stroke-width="1.5"/>')
        for px, py in coords:
            parts.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="3" fill="crimson"/>')
        lo = f"1e{ymin:g}" if log_y else f"{ymin:g}"
        hi = f"1e{ymax:g}" if log_y else f"{ymax:g}"
        parts.append(f'<text x="{MARGIN_L - 6}" y="{HEIGHT - MARGIN_B}" text-anchor="end" {FONT}>{lo}</text>')
        parts.append(f'<text x="{MARGIN_L - 6}" y="{MARGIN_T + 12}" text-anchor="end" {FONT}>{hi}</text>')
        parts.append(f'<text x="{MARGIN_L}" y="{HEIGHT - MARGIN_B + 16}" text-anchor="middle" {FONT}>{xmin:g}</text>')
        parts.append(f'<text x="{WIDTH - MARGIN_R}" y="{HEIGHT - MARGIN_B + 16}" text-anchor="end" {FONT}>{xmax:g}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def plot_csv(csv_path, kind: str, out_path, log_y: bool = False,
             x_col: int = 0, y_col: int = 1) -> None:
    """Render a CSV produced by the experiment commands to SVG.

    kind "histogram" expects (value, count) columns; "line" plots y_col
    against x_col.  An empty CSV yields an empty-axes SVG.
    """
    csv_path = Path(csv_path)
    meta, header, rows = read_csv_table(csv_path)
    title = csv_path.stem
    if kind == "histogram":
        data = [(float(r[x_col]), float(r[y_col])) for r in rows]
        xlabel = header[x_col] if header else "value"
        ylabel = header[y_col] if len(header) > 1 else "count"
        svg = render_histogram(data, title, xlabel, ylabel)
    elif kind == "line":
        data = [(float(r[x_col]), float(r[y_col])) for r in rows]
        xlabel = header[x_col] if header else "x"
        ylabel = header[y_col] if len(header) > 1 else "y"
        svg = render_line(data, title, xlabel, ylabel, log_y=log_y)
    else:
        raise ValueError(f"unknown plot kind {kind!r}")
    Path(out_path).write_text(svg)
