"""Deterministic SVG charts: price histories, (e, sigma) planes and risk planes.

Output depends only on the inputs: fixed viewBox, fixed palette, fixed
number formatting, no timestamps or random ids.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import DomainError
from .linear import OrthoBasis
from .market_data import PricePanel

__all__ = ["Chart", "plot_prices", "plot_esig", "plot_riskplane", "PLOT_KINDS"]

PLOT_KINDS = ("prices", "esig", "riskplane")
PALETTE = ("#1f4e9c", "#2e8b3a", "#8b5a2b", "#c0392b", "#7d3c98", "#d68910", "#17a589", "#566573")

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=64, right=96, top=28, bottom=48)


def _f(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        lo, hi = lo - 0.5, hi + 0.5
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = start
    while t <= hi + step * 1e-9:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _tick_label(t: float) -> str:
    return f"{t:.6g}"


class Chart:
    """A single axes box mapping data coordinates onto the fixed canvas."""

    def __init__(self, xlim, ylim, title="", xlabel="", ylabel=""):
        self.x0, self.x1 = self._pad(*xlim)
        self.y0, self.y1 = self._pad(*ylim)
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.items: list[str] = []

    @staticmethod
    def _pad(lo, hi):
        if hi - lo <= 1e-12 * max(1.0, abs(lo), abs(hi)):
            half = 0.5 * max(abs(lo), 1.0) * 0.1
            return lo - half, hi + half
        pad = 0.04 * (hi - lo)
        return lo - pad, hi + pad

    def px(self, x: float) -> float:
        span = WIDTH - MARGIN["left"] - MARGIN["right"]
        return MARGIN["left"] + (x - self.x0) / (self.x1 - self.x0) * span

    def py(self, y: float) -> float:
        span = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
        return HEIGHT - MARGIN["bottom"] - (y - self.y0) / (self.y1 - self.y0) * span

    def polyline(self, xs, ys, color, label=None, width=1.5):
        pts = " ".join(f"{_f(self.px(x))},{_f(self.py(y))}" for x, y in zip(xs, ys))
        attr = f' data-label="{escape(label)}"' if label else ""
        self.items.append(
            f'<polyline class="series"{attr} fill="none" stroke="{color}" '
            f'stroke-width="{width}" points="{pts}"/>'
        )

    def point(self, x, y, color, label=None):
        cx, cy = _f(self.px(x)), _f(self.py(y))
        attr = f' data-label="{escape(label)}"' if label else ""
        self.items.append(f'<circle class="point"{attr} cx="{cx}" cy="{cy}" r="4" fill="{color}" stroke="#000"/>')
        if label:
            self.text(x, y, label, dx=6, dy=-6)

    def text(self, x, y, s, dx=0, dy=0, color="#000"):
        self.items.append(
            f'<text x="{_f(self.px(x) + dx)}" y="{_f(self.py(y) + dy)}" '
            f'font-size="11" fill="{color}">{escape(s)}</text>'
        )

    def hline(self, y, color="#888"):
        self.items.append(
            f'<line class="axis-y0" x1="{_f(self.px(self.x0))}" y1="{_f(self.py(y))}" '
            f'x2="{_f(self.px(self.x1))}" y2="{_f(self.py(y))}" stroke="{color}"/>'
        )

    def vline(self, x, color="#888"):
        self.items.append(
            f'<line class="axis-x0" x1="{_f(self.px(x))}" y1="{_f(self.py(self.y0))}" '
            f'x2="{_f(self.px(x))}" y2="{_f(self.py(self.y1))}" stroke="{color}"/>'
        )

    def render(self, xticks=None, xticklabels=None) -> str:
        L, T = MARGIN["left"], MARGIN["top"]
        R, B = WIDTH - MARGIN["right"], HEIGHT - MARGIN["bottom"]
        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
            f'width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif">',
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#fff"/>',
        ]
        if self.title:
            out.append(f'<text x="{WIDTH / 2:.2f}" y="18" font-size="13" text-anchor="middle">{escape(self.title)}</text>')
        out.append(f'<rect class="frame" x="{L}" y="{T}" width="{R - L}" height="{B - T}" fill="none" stroke="#000"/>')
        if xticks is None:
            xticks = [t for t in nice_ticks(self.x0, self.x1) if self.x0 <= t <= self.x1]
            xticklabels = [_tick_label(t) for t in xticks]
        for t, lab in zip(xticks, xticklabels):
            x = _f(self.px(t))
            out.append(f'<line x1="{x}" y1="{B}" x2="{x}" y2="{B + 4}" stroke="#000"/>')
            out.append(f'<text x="{x}" y="{B + 16}" font-size="10" text-anchor="middle">{escape(lab)}</text>')
        for t in nice_ticks(self.y0, self.y1):
            if not self.y0 <= t <= self.y1:
                continue
            y = _f(self.py(t))
            out.append(f'<line x1="{L - 4}" y1="{y}" x2="{L}" y2="{y}" stroke="#000"/>')
            out.append(f'<text x="{L - 6}" y="{y}" font-size="10" text-anchor="end" dominant-baseline="middle">{_tick_label(t)}</text>')
        if self.xlabel:
            out.append(f'<text x="{(L + R) / 2:.2f}" y="{HEIGHT - 10}" font-size="12" text-anchor="middle">{escape(self.xlabel)}</text>')
        if self.ylabel:
            out.append(
                f'<text x="14" y="{(T + B) / 2:.2f}" font-size="12" text-anchor="middle" '
                f'transform="rotate(-90 14 {(T + B) / 2:.2f})">{escape(self.ylabel)}</text>'
            )
        out.extend(self.items)
        out.append("</svg>")
        return "\n".join(out) + "\n"


def plot_prices(panel: PricePanel, title: str = "Normalized adjusted closing prices") -> str:
    """One labeled polyline per panel column against market-day index."""
    n = len(panel.dates)
    idx = np.arange(n)
    vals = panel.values
    chart = Chart((0, n - 1), (float(vals.min()), float(vals.max())), title, "market day", "price")
    for j, label in enumerate(panel.labels):
        color = PALETTE[j % len(PALETTE)]
        chart.polyline(idx, vals[:, j], color, label)
        chart.text(n - 1, vals[-1, j], label, dx=8, dy=4, color=color)
    step = max(1, (n - 1) // 4)
    ticks = list(range(0, n, step))
    return chart.render(ticks, [str(panel.dates[t]) for t in ticks])


def plot_esig(
    points: Mapping[str, tuple[float, float]],
    paths: Mapping[str, Sequence[tuple[float, float]]] | None = None,
    title: str = "Obtainable (e, sigma)",
    xlabel: str = "e",
    ylabel: str = "sigma",
) -> str:
    """Labeled (e, sigma) points plus optional sampled paths."""
    paths = paths or {}
    xs = [p[0] for p in points.values()] + [q[0] for path in paths.values() for q in path]
    ys = [p[1] for p in points.values()] + [q[1] for path in paths.values() for q in path]
    if not xs:
        raise DomainError("nothing to plot")
    chart = Chart((min(xs), max(xs)), (min(ys), max(ys)), title, xlabel, ylabel)
    for j, (name, path) in enumerate(paths.items()):
        chart.polyline([q[0] for q in path], [q[1] for q in path], PALETTE[(j + 3) % len(PALETTE)], name)
    for j, (label, (e, s)) in enumerate(points.items()):
        chart.point(e, s, PALETTE[j % len(PALETTE)], label)
    return chart.render()


def plot_riskplane(basis: OrthoBasis, title: str = "The xy-plane in risk space") -> str:
    """First two risk coordinates of every fund, with axes through the origin."""
    if basis.k < 2:
        raise DomainError("risk plane needs at least 2 orthogonal directions")
    x, y = basis.Ztilde[0], basis.Ztilde[1]
    chart = Chart(
        (min(0.0, float(x.min())), max(0.0, float(x.max()))),
        (min(0.0, float(y.min())), max(0.0, float(y.max()))),
        title,
        "x",
        "y",
    )
    chart.hline(0.0)
    chart.vline(0.0)
    for j, label in enumerate(basis.labels):
        chart.point(float(x[j]), float(y[j]), PALETTE[j % len(PALETTE)], label)
    return chart.render()


def esig_points(labels: Iterable[str], stats: Iterable[tuple[float, float]]) -> dict:
    return {lab: (float(e), float(s)) for lab, (e, s) in zip(labels, stats)}
