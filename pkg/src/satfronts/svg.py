"""Tiny SVG line-plot writer: panels side by side, linear axes, polylines, a legend."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from html import escape
from pathlib import Path

import numpy as np

PALETTE = ("#000000", "#555555", "#888888", "#1f5fa8", "#b8452f", "#3f8f4f", "#7a4fa0")
DASHES = ("", "6,4", "2,3", "8,3,2,3", "", "6,4", "2,3")


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str = ""
    color: str | None = None
    dash: str | None = None


@dataclass
class Panel:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    series: list[Series] = field(default_factory=list)
    xlim: tuple[float, float] | None = None
    ylim: tuple[float, float] | None = None

    def add(self, x, y, label: str = "", color: str | None = None, dash: str | None = None) -> None:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        keep = np.isfinite(x) & np.isfinite(y)
        self.series.append(Series(x[keep], y[keep], label, color, dash))

    def limits(self) -> tuple[tuple[float, float], tuple[float, float]]:
        xs = np.concatenate([s.x for s in self.series]) if self.series else np.array([0.0, 1.0])
        ys = np.concatenate([s.y for s in self.series]) if self.series else np.array([0.0, 1.0])
        return self.xlim or _pad(xs.min(), xs.max()), self.ylim or _pad(ys.min(), ys.max())


def _pad(lo: float, hi: float) -> tuple[float, float]:
    if hi <= lo:
        return lo - 0.5, hi + 0.5
    d = 0.04 * (hi - lo)
    return lo - d, hi + d


def nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    raw = (hi - lo) / max(n, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".") if v == v else "nan"


def render(panels: list[Panel], width: int = 520, height: int = 380) -> str:
    """SVG document with the panels laid out left to right."""
    margin_l, margin_r, margin_t, margin_b = 62, 16, 30, 46
    total_w = width * len(panels)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{height}" '
        f'viewBox="0 0 {total_w} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{total_w}" height="{height}" fill="white"/>',
    ]
    for k, panel in enumerate(panels):
        ox = k * width
        x0, x1 = ox + margin_l, ox + width - margin_r
        y0, y1 = height - margin_b, margin_t
        (xa, xb), (ya, yb) = panel.limits()

        def px(x, xa=xa, xb=xb, x0=x0, x1=x1):
            return x0 + (x - xa) / (xb - xa) * (x1 - x0)

        def py(y, ya=ya, yb=yb, y0=y0, y1=y1):
            return y0 + (y - ya) / (yb - ya) * (y1 - y0)

        out.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="#000"/>')
        for t in nice_ticks(xa, xb):
            X = px(t)
            out.append(f'<line x1="{X:.2f}" y1="{y0}" x2="{X:.2f}" y2="{y0 + 4}" stroke="#000"/>')
            out.append(f'<text x="{X:.2f}" y="{y0 + 16}" text-anchor="middle">{_fmt(t)}</text>')
        for t in nice_ticks(ya, yb):
            Y = py(t)
            out.append(f'<line x1="{x0 - 4}" y1="{Y:.2f}" x2="{x0}" y2="{Y:.2f}" stroke="#000"/>')
            out.append(f'<text x="{x0 - 6}" y="{Y + 4:.2f}" text-anchor="end">{_fmt(t)}</text>')
        if panel.title:
            out.append(f'<text x="{(x0 + x1) / 2:.2f}" y="{y1 - 10}" text-anchor="middle">{escape(panel.title)}</text>')
        if panel.xlabel:
            out.append(f'<text x="{(x0 + x1) / 2:.2f}" y="{height - 8}" text-anchor="middle">{escape(panel.xlabel)}</text>')
        if panel.ylabel:
            cy = (y0 + y1) / 2
            out.append(f'<text x="{ox + 14}" y="{cy:.2f}" text-anchor="middle" '
                       f'transform="rotate(-90 {ox + 14} {cy:.2f})">{escape(panel.ylabel)}</text>')
        out.append(f'<clipPath id="clip{k}"><rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}"/></clipPath>')
        for i, s in enumerate(panel.series):
            color = s.color or PALETTE[i % len(PALETTE)]
            dash = DASHES[i % len(DASHES)] if s.dash is None else s.dash
            pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(s.x, s.y))
            style = f' stroke-dasharray="{dash}"' if dash else ""
            out.append(f'<polyline clip-path="url(#clip{k})" fill="none" stroke="{color}" '
                       f'stroke-width="1.4"{style} points="{pts}"/>')
            if s.label:
                ly = y1 + 14 + 14 * i
                out.append(f'<line x1="{x1 - 110}" y1="{ly - 4}" x2="{x1 - 86}" y2="{ly - 4}" '
                           f'stroke="{color}" stroke-width="1.4"{style}/>')
                out.append(f'<text x="{x1 - 82}" y="{ly}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write(path: str | Path, panels: list[Panel], **kw) -> None:
    Path(path).write_text(render(panels, **kw), encoding="utf-8")
