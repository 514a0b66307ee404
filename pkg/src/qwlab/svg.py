"""Minimal deterministic SVG 1.1 line/scatter charts on a fixed 800x600 viewBox."""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 800, 600
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


@dataclass
class Series:
    x: Sequence[float]
    y: Sequence[float]
    label: str = ""
    markers: bool = False
    color: Optional[str] = None


@dataclass
class Panel:
    series: List[Series]
    xlabel: str = ""
    ylabel: str = ""
    title: str = ""
    logy: bool = False
    hlines: List[float] = field(default_factory=list)


def _nice_ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _fmt(v):
    return f"{v:.2f}"


def _label(v):
    return f"{v:g}"


def _panel_svg(panel, x0, y0, w, h):
    out = []
    xs, ys = [], []
    for s in panel.series:
        x = np.asarray(s.x, dtype=float)
        y = np.asarray(s.y, dtype=float)
        keep = np.isfinite(x) & np.isfinite(y)
        if panel.logy:
            keep &= y > 0
        xs.append(x[keep])
        ys.append(np.log10(y[keep]) if panel.logy else y[keep])
    allx = np.concatenate(xs) if xs else np.zeros(1)
    ally = np.concatenate(ys + [np.log10(panel.hlines) if panel.logy else np.asarray(panel.hlines, float)])
    if allx.size == 0:
        allx = np.zeros(1)
    if ally.size == 0:
        ally = np.zeros(1)
    xmin, xmax = float(allx.min()), float(allx.max())
    ymin, ymax = float(ally.min()), float(ally.max())
    if xmax == xmin:
        xmax = xmin + 1.0
    if ymax == ymin:
        ymax = ymin + 1.0
    pad = 0.05 * (ymax - ymin)
    ymin, ymax = ymin - pad, ymax + pad

    def px(v):
        return x0 + (v - xmin) / (xmax - xmin) * w

    def py(v):
        return y0 + h - (v - ymin) / (ymax - ymin) * h

    out.append(f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(w)}" height="{_fmt(h)}" fill="none" stroke="#000"/>')
    for t in _nice_ticks(xmin, xmax):
        out.append(f'<line x1="{_fmt(px(t))}" y1="{_fmt(y0 + h)}" x2="{_fmt(px(t))}" y2="{_fmt(y0 + h + 5)}" stroke="#000"/>')
        out.append(f'<text x="{_fmt(px(t))}" y="{_fmt(y0 + h + 18)}" font-size="11" text-anchor="middle">{_label(t)}</text>')
    for t in _nice_ticks(ymin, ymax):
        text = f"1e{_label(t)}" if panel.logy else _label(t)
        out.append(f'<line x1="{_fmt(x0 - 5)}" y1="{_fmt(py(t))}" x2="{_fmt(x0)}" y2="{_fmt(py(t))}" stroke="#000"/>')
        out.append(f'<text x="{_fmt(x0 - 8)}" y="{_fmt(py(t) + 4)}" font-size="11" text-anchor="end">{escape(text)}</text>')
    for level in panel.hlines:
        v = math.log10(level) if panel.logy else level
        out.append(
            f'<line x1="{_fmt(x0)}" y1="{_fmt(py(v))}" x2="{_fmt(x0 + w)}" y2="{_fmt(py(v))}" '
            'stroke="#555" stroke-dasharray="6,4"/>'
        )
    for i, (s, x, y) in enumerate(zip(panel.series, xs, ys)):
        color = s.color or PALETTE[i % len(PALETTE)]
        if s.markers:
            for a, b in zip(x, y):
                out.append(f'<circle cx="{_fmt(px(a))}" cy="{_fmt(py(b))}" r="2.5" fill="{color}"/>')
        elif x.size:
            pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(x, y))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        if s.label:
            ly = y0 + 16 + 16 * i
            out.append(f'<rect x="{_fmt(x0 + w - 150)}" y="{_fmt(ly - 9)}" width="10" height="10" fill="{color}"/>')
            out.append(f'<text x="{_fmt(x0 + w - 135)}" y="{_fmt(ly)}" font-size="12">{escape(s.label)}</text>')
    if panel.title:
        out.append(f'<text x="{_fmt(x0 + w / 2)}" y="{_fmt(y0 - 8)}" font-size="14" text-anchor="middle">{escape(panel.title)}</text>')
    if panel.xlabel:
        out.append(f'<text x="{_fmt(x0 + w / 2)}" y="{_fmt(y0 + h + 36)}" font-size="12" text-anchor="middle">{escape(panel.xlabel)}</text>')
    if panel.ylabel:
        cx, cy = x0 - 52, y0 + h / 2
        out.append(
            f'<text x="{_fmt(cx)}" y="{_fmt(cy)}" font-size="12" text-anchor="middle" '
            f'transform="rotate(-90 {_fmt(cx)} {_fmt(cy)})">{escape(panel.ylabel)}</text>'
        )
    return out


def render(panels):
    """SVG document with the panels stacked vertically."""
    n = len(panels)
    left, right, top, bottom = 80, 30, 40, 50
    slot = HEIGHT / n
    body = []
    for i, panel in enumerate(panels):
        body.extend(_panel_svg(panel, left, i * slot + top, WIDTH - left - right, slot - top - bottom))
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif">\n'
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#fff"/>\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def write(path, panels):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render(panels))
