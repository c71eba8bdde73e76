"""Minimal log-y line chart written as standalone SVG."""
from __future__ import annotations

import math
from typing import Dict, List, Sequence, Tuple
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")
DASHES = {"exact": "", "asymptotic": "6,4", "monte_carlo": "2,3", "noma": "10,3,2,3"}


def line_chart(series: Dict[str, List[Tuple[float, float]]], xlabel: str, ylabel: str = "outage probability",
               width: int = 640, height: int = 420, styles: Dict[str, str] | None = None) -> str:
    """``series`` maps a legend label to (x, y) points; non-positive y are dropped."""
    styles = styles or {}
    pts = {k: [(x, y) for x, y in v if y is not None and y > 0 and math.isfinite(y)] for k, v in series.items()}
    xs = [x for v in pts.values() for x, _ in v] or [0.0, 1.0]
    ys = [y for v in pts.values() for _, y in v] or [1e-3, 1.0]
    x0, x1 = min(xs), max(xs)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    d0 = math.floor(math.log10(min(ys)))
    d1 = max(math.ceil(math.log10(max(ys))), d0 + 1)
    ml, mr, mt, mb = 70, 150, 20, 50
    pw, ph = width - ml - mr, height - mt - mb

    def sx(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return mt + (d1 - math.log10(y)) / (d1 - d0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           '<rect width="100%" height="100%" fill="white"/>']
    for d in range(d0, d1 + 1):
        y = sy(10.0**d)
        out.append(f'<line x1="{ml}" y1="{y:.2f}" x2="{ml + pw}" y2="{y:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{ml - 6}" y="{y + 4:.2f}" text-anchor="end">1e{d}</text>')
    for x in _ticks(x0, x1):
        px = sx(x)
        out.append(f'<line x1="{px:.2f}" y1="{mt + ph}" x2="{px:.2f}" y2="{mt + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{mt + ph + 16}" text-anchor="middle">{x:g}</text>')
    out.append(f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text transform="translate(16 {mt + ph / 2}) rotate(-90)" text-anchor="middle">'
               f'{escape(ylabel)}</text>')
    for i, (label, v) in enumerate(pts.items()):
        colour = PALETTE[i % len(PALETTE)]
        dash = styles.get(label, "")
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        if len(v) > 1:
            path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in v)
            out.append(f'<polyline points="{path}" fill="none" stroke="{colour}" stroke-width="1.6"{dash_attr}/>')
        for x, y in v:
            out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.2" fill="{colour}"/>')
        ly = mt + 14 + 16 * i
        out.append(f'<line x1="{ml + pw + 10}" y1="{ly}" x2="{ml + pw + 34}" y2="{ly}" stroke="{colour}" '
                   f'stroke-width="1.6"{dash_attr}/>')
        out.append(f'<text x="{ml + pw + 38}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _ticks(a: float, b: float, n: int = 6) -> Sequence[float]:
    raw = (b - a) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=raw)
    first = math.ceil(a / step) * step
    return [round(first + i * step, 10) for i in range(int((b - first) / step + 1e-9) + 1)]
