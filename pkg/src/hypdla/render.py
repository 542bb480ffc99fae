"""SVG pictures of aggregates in the disc or half-plane chart.

A hyperbolic circle is a Euclidean circle in both charts, but its hyperbolic
center is not the Euclidean one. Each ball is therefore drawn by mapping
three points of its boundary and taking the circle through them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .observables import frame_stats, normalized_centers

CHARTS = ("disc", "halfplane")
HIGHLIGHTS = ("none", "front", "parent_edges")
# circles below this many pixels are omitted from the picture
MIN_RADIUS_PX = 1e-3


@dataclass(frozen=True)
class RenderOptions:
    chart: str = "disc"
    width_px: int = 800
    highlight: str = "none"
    radius_shown: int = 1

    def __post_init__(self):
        if self.chart not in CHARTS:
            raise ValueError(f"chart must be one of {CHARTS}")
        if self.highlight not in HIGHLIGHTS:
            raise ValueError(f"highlight must be one of {HIGHLIGHTS}")
        if self.radius_shown not in (1, 2):
            raise ValueError("radius_shown must be 1 or 2")
        if not 64 <= self.width_px <= 8192:
            raise ValueError("width_px must lie in [64, 8192]")


def _cayley(x, y):
    z = x + 1j * y
    return (z - 1j) / (z + 1j)


def circumcircle(a, b, c):
    """Center and radius of the circle through three complex points."""
    # translate to a for conditioning
    b = b - a
    c = c - a
    d = 2.0 * (b.real * c.imag - b.imag * c.real)
    bb = abs(b) ** 2
    cc = abs(c) ** 2
    ux = (c.imag * bb - b.imag * cc) / d
    uy = (b.real * cc - c.real * bb) / d
    return a + complex(ux, uy), math.hypot(ux, uy)


def chart_circles(aggregate, chart: str = "disc", radius: float = 1.0) -> np.ndarray:
    """``(n, 3)`` array of image circles ``(cx, cy, r)`` of the radius-``radius`` balls.

    Coordinates are taken in the chart with the origin particle at ``(0, 1)``
    (disc center for ``chart="disc"``).
    """
    x, y = normalized_centers(aggregate)
    ecy = y * math.cosh(radius)
    er = y * math.sinh(radius)
    if chart == "halfplane":
        return np.column_stack([x, ecy, er])
    out = np.empty((len(x), 3))
    angles = (0.5 * math.pi, 0.5 * math.pi + 2 * math.pi / 3, 0.5 * math.pi + 4 * math.pi / 3)
    for i in range(len(x)):
        a, b, c = (_cayley(x[i] + er[i] * math.cos(t), ecy[i] + er[i] * math.sin(t)) for t in angles)
        w, r = circumcircle(a, b, c)
        out[i] = (w.real, w.imag, r)
    return out


def _fmt(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


def render_svg(aggregate, opts: RenderOptions = RenderOptions(), meta: dict | None = None) -> bytes:
    """Deterministic SVG bytes for ``aggregate``; ``meta`` is embedded as JSON in ``<desc>``."""
    if len(aggregate) == 0:
        raise ValueError("nothing to render")
    circles = chart_circles(aggregate, opts.chart, float(opts.radius_shown))
    W = opts.width_px
    if opts.chart == "disc":
        H = W
        scale = 0.5 * W * 0.98
        ox, oy = 0.5 * W, 0.5 * H

        def tx(u, v):
            return ox + scale * u, oy - scale * v
    else:
        x0 = float(np.min(circles[:, 0] - circles[:, 2]))
        x1 = float(np.max(circles[:, 0] + circles[:, 2]))
        y1 = float(np.max(circles[:, 1] + circles[:, 2]))
        span = max(x1 - x0, 1e-12)
        pad = 0.02 * span
        scale = W / (span + 2 * pad)
        H = max(64, int(math.ceil((y1 + pad) * scale)))

        def tx(u, v):
            return (u - x0 + pad) * scale, H - v * scale

    front = set()
    if opts.highlight == "front":
        front = set(frame_stats(aggregate).front_indices)

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
    ]
    if meta is not None:
        desc = json.dumps(meta, sort_keys=True).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        lines.append(f"<desc>{desc}</desc>")
    lines.append('<rect width="100%" height="100%" fill="white"/>')
    if opts.chart == "disc":
        lines.append(f'<circle cx="{_fmt(ox)}" cy="{_fmt(oy)}" r="{_fmt(scale)}" fill="none" stroke="#888" '
                     f'stroke-width="1"/>')
        lines.append(f'<clipPath id="disc"><circle cx="{_fmt(ox)}" cy="{_fmt(oy)}" r="{_fmt(scale)}"/></clipPath>')
        lines.append('<g clip-path="url(#disc)">')
    else:
        lines.append(f'<line x1="0" y1="{H}" x2="{W}" y2="{H}" stroke="#888" stroke-width="1"/>')
        lines.append("<g>")

    if opts.highlight == "parent_edges":
        x, y = normalized_centers(aggregate)
        if opts.chart == "disc":
            w = _cayley(x, y)
            x, y = w.real, w.imag
        pts = np.column_stack([x, y])
        for p in aggregate.particles[1:]:
            a = tx(*pts[p.parent])
            b = tx(*pts[p.birth_index])
            lines.append(f'<line x1="{_fmt(a[0])}" y1="{_fmt(a[1])}" x2="{_fmt(b[0])}" y2="{_fmt(b[1])}" '
                         f'stroke="#c33" stroke-width="0.5"/>')

    for i, (u, v, r) in enumerate(circles):
        rp = r * scale
        if rp < MIN_RADIUS_PX:
            continue
        px, py = tx(u, v)
        fill = "#f90" if i in front else ("#36c" if i == 0 else "none")
        lines.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="{_fmt(rp)}" fill="{fill}" '
                     f'stroke="#124" stroke-width="0.4"/>')
    lines.append("</g>")
    lines.append("</svg>")
    return ("\n".join(lines) + "\n").encode("utf-8")

