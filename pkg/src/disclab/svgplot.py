"""Minimal log-log SVG line/scatter plots with no plotting dependency."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def loglog_svg(series: dict, title: str = "", xlabel: str = "", ylabel: str = "",
               ref_slopes=(), width: int = 640, height: int = 440) -> str:
    """``series`` maps a name to (xs, ys); nonpositive points are dropped.

    Each reference slope is drawn as a dashed line through the first point
    of the first series.
    """
    clean = {}
    for name, (xs, ys) in series.items():
        pts = [(math.log10(x), math.log10(y)) for x, y in zip(xs, ys) if x > 0 and y > 0]
        if pts:
            clean[name] = pts
    if not clean:
        raise ValueError("nothing positive to plot")
    allp = [p for pts in clean.values() for p in pts]
    x0, x1 = min(p[0] for p in allp), max(p[0] for p in allp)
    y0, y1 = min(p[1] for p in allp), max(p[1] for p in allp)
    x1, y1 = max(x1, x0 + 1e-9), max(y1, y0 + 1e-9)
    L, R, T, B = 70, 150, 40, 50
    pw, ph = width - L - R, height - T - B

    def sx(u):
        return L + (u - x0) / (x1 - x0) * pw

    def sy(v):
        return T + (y1 - v) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect x="{L}" y="{T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
           f'<text x="{width / 2:.1f}" y="20" text-anchor="middle">{escape(title)}</text>',
           f'<text x="{L + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>',
           f'<text x="15" y="{T + ph / 2:.1f}" transform="rotate(-90 15 {T + ph / 2:.1f})" '
           f'text-anchor="middle">{escape(ylabel)}</text>']
    for d in range(math.ceil(x0), math.floor(x1) + 1):
        out.append(f'<text x="{sx(d):.1f}" y="{T + ph + 16}" text-anchor="middle">1e{d}</text>')
    for d in range(math.ceil(y0), math.floor(y1) + 1):
        out.append(f'<text x="{L - 6}" y="{sy(d) + 4:.1f}" text-anchor="end">1e{d}</text>')
    bx, by = next(iter(clean.values()))[0]
    for k, s in enumerate(ref_slopes):
        ya, yb = by, by + s * (x1 - bx)
        out.append(f'<line x1="{sx(bx):.2f}" y1="{sy(ya):.2f}" x2="{sx(x1):.2f}" y2="{sy(yb):.2f}" '
                   f'stroke="gray" stroke-dasharray="5,4"/>')
        out.append(f'<text x="{width - R + 8}" y="{T + ph - 16 * k:.1f}" fill="gray">slope {s:g}</text>')
    for k, (name, pts) in enumerate(clean.items()):
        col = PALETTE[k % len(PALETTE)]
        path = " ".join(f"{sx(u):.2f},{sy(v):.2f}" for u, v in pts)
        out.append(f'<polyline points="{path}" fill="none" stroke="{col}"/>')
        out.extend(f'<circle cx="{sx(u):.2f}" cy="{sy(v):.2f}" r="2.5" fill="{col}"/>' for u, v in pts)
        out.append(f'<text x="{width - R + 8}" y="{T + 14 + 16 * k}" fill="{col}">{escape(str(name))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
