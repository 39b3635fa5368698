"""Minimal SVG writers for line plots and heatmaps (no plotting dependency)."""

from __future__ import annotations

import math
from html import escape
from typing import Sequence

WIDTH, HEIGHT = 640, 420
MARGIN = 60
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _fmt(v: float) -> str:
    return f"{v:.3g}"


def _transform(vals, log: bool):
    return [math.log10(v) if log else v for v in vals]


def line_plot(series: Sequence[tuple[str, Sequence[float], Sequence[float]]], *, title: str = "",
              xlabel: str = "", ylabel: str = "", logx: bool = False, logy: bool = False) -> str:
    """Polyline per series; non-positive values are dropped on log axes."""
    cleaned = []
    for label, xs, ys in series:
        pts = [(x, y) for x, y in zip(xs, ys)
               if y is not None and math.isfinite(y) and (not logx or x > 0) and (not logy or y > 0)]
        cleaned.append((label, pts))
    allx = [p[0] for _, pts in cleaned for p in pts]
    ally = [p[1] for _, pts in cleaned for p in pts]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">',
             '<rect width="100%" height="100%" fill="white"/>',
             f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="15">{escape(title)}</text>']
    if allx:
        tx, ty = _transform(allx, logx), _transform(ally, logy)
        x0, x1 = min(tx), max(tx)
        y0, y1 = min(ty), max(ty)
        x1 = x1 if x1 > x0 else x0 + 1
        y1 = y1 if y1 > y0 else y0 + 1

        def sx(v):
            return MARGIN + (v - x0) / (x1 - x0) * (WIDTH - 2 * MARGIN)

        def sy(v):
            return HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2 * MARGIN)

        parts.append(f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" '
                     f'height="{HEIGHT - 2 * MARGIN}" fill="none" stroke="#444"/>')
        for i in range(5):
            fx = x0 + (x1 - x0) * i / 4
            fy = y0 + (y1 - y0) * i / 4
            lx = 10**fx if logx else fx
            ly = 10**fy if logy else fy
            parts.append(f'<text x="{sx(fx):.1f}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle" '
                         f'font-size="11">{_fmt(lx)}</text>')
            parts.append(f'<text x="{MARGIN - 6}" y="{sy(fy) + 4:.1f}" text-anchor="end" '
                         f'font-size="11">{_fmt(ly)}</text>')
        for k, (label, pts) in enumerate(cleaned):
            color = PALETTE[k % len(PALETTE)]
            coords = " ".join(f"{sx(a):.1f},{sy(b):.1f}" for a, b in
                              zip(_transform([p[0] for p in pts], logx), _transform([p[1] for p in pts], logy)))
            parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>')
            parts.append(f'<text x="{WIDTH - MARGIN + 4}" y="{MARGIN + 14 * (k + 1)}" font-size="11" '
                         f'fill="{color}">{escape(label)}</text>')
    parts.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 16}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>')
    parts.append(f'<text x="16" y="{HEIGHT / 2}" font-size="12" transform="rotate(-90 16 {HEIGHT / 2})" '
                 f'text-anchor="middle">{escape(ylabel)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def heatmap(values: Sequence[Sequence[float]], *, title: str = "", extent=(0.0, 1.0, 0.0, 1.0)) -> str:
    """Grayscale-to-blue heatmap of a 2D array (rows are y, top row printed last)."""
    rows = len(values)
    cols = len(values[0]) if rows else 0
    flat = [v for r in values for v in r if v is not None and math.isfinite(v)]
    lo, hi = (min(flat), max(flat)) if flat else (0.0, 1.0)
    span = hi - lo if hi > lo else 1.0
    cw = (WIDTH - 2 * MARGIN) / max(cols, 1)
    ch = (HEIGHT - 2 * MARGIN) / max(rows, 1)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">',
             '<rect width="100%" height="100%" fill="white"/>',
             f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="15">{escape(title)}</text>']
    for i, r in enumerate(values):
        for j, v in enumerate(r):
            t = 0.0 if v is None or not math.isfinite(v) else (v - lo) / span
            color = f"rgb({int(255 * (1 - t))},{int(255 * (1 - 0.6 * t))},255)"
            y = HEIGHT - MARGIN - (i + 1) * ch
            parts.append(f'<rect x="{MARGIN + j * cw:.1f}" y="{y:.1f}" width="{cw + 0.5:.1f}" '
                         f'height="{ch + 0.5:.1f}" fill="{color}"/>')
    parts.append(f'<text x="{MARGIN}" y="{HEIGHT - MARGIN + 16}" font-size="11">{_fmt(extent[0])}</text>')
    parts.append(f'<text x="{WIDTH - MARGIN}" y="{HEIGHT - MARGIN + 16}" text-anchor="end" '
                 f'font-size="11">{_fmt(extent[1])}</text>')
    parts.append(f'<text x="{WIDTH - MARGIN + 4}" y="{MARGIN + 12}" font-size="11">max {_fmt(hi)}</text>')
    parts.append(f'<text x="{WIDTH - MARGIN + 4}" y="{HEIGHT - MARGIN}" font-size="11">min {_fmt(lo)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
