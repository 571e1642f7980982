"""Minimal line-chart SVG writer with fixed layout and number formatting."""

from __future__ import annotations

import math
from typing import Mapping, Sequence

WIDTH, HEIGHT = 800, 500
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 80, 30, 40, 60
LOG_FLOOR = 1e-16
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float, log_y: bool) -> str:
    return f"1e{int(round(v))}" if log_y else f"{v:.4g}"


def line_chart(
    series: Mapping[str, Sequence[float]],
    title: str,
    xlabel: str = "t",
    ylabel: str = "",
    log_y: bool = False,
) -> str:
    """Render series sharing the x axis ``1..len`` as an SVG document.

    With ``log_y`` the y axis shows ``log10`` of the values, floored at
    ``1e-16`` so exact zeros stay drawable.
    """
    names = list(series)
    n = max(len(series[k]) for k in names)
    ys = {}
    for k in names:
        vals = [float(v) for v in series[k]]
        ys[k] = [math.log10(max(v, LOG_FLOOR)) for v in vals] if log_y else vals
    lo = min(min(v) for v in ys.values())
    hi = max(max(v) for v in ys.values())
    if log_y:
        lo, hi = math.floor(lo), math.ceil(hi)
    if hi == lo:
        hi = lo + 1.0
    pw, ph = WIDTH - MARGIN_L - MARGIN_R, HEIGHT - MARGIN_T - MARGIN_B

    def px(t):
        return MARGIN_L + (t - 1) / max(n - 1, 1) * pw

    def py(y):
        return MARGIN_T + (hi - y) / (hi - lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{_esc(title)}</text>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T + ph}" x2="{MARGIN_L + pw}" y2="{MARGIN_T + ph}" stroke="black"/>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{MARGIN_T + ph}" stroke="black"/>',
    ]
    yticks = [lo + (hi - lo) * k / 5 for k in range(6)]
    if log_y and hi - lo <= 20:
        yticks = [float(v) for v in range(int(lo), int(hi) + 1, max(1, int(hi - lo) // 8 or 1))]
    for y in yticks:
        out.append(
            f'<line x1="{MARGIN_L - 5}" y1="{_fmt(py(y))}" x2="{MARGIN_L}" y2="{_fmt(py(y))}" stroke="black"/>'
            f'<text x="{MARGIN_L - 8}" y="{_fmt(py(y) + 4)}" text-anchor="end" font-family="sans-serif" font-size="11">{_tick_label(y, log_y)}</text>'
        )
    for k in range(6):
        t = 1 + (n - 1) * k / 5
        out.append(
            f'<line x1="{_fmt(px(t))}" y1="{MARGIN_T + ph}" x2="{_fmt(px(t))}" y2="{MARGIN_T + ph + 5}" stroke="black"/>'
            f'<text x="{_fmt(px(t))}" y="{MARGIN_T + ph + 20}" text-anchor="middle" font-family="sans-serif" font-size="11">{t:.0f}</text>'
        )
    out.append(f'<text x="{MARGIN_L + pw / 2:.0f}" y="{HEIGHT - 15}" text-anchor="middle" font-family="sans-serif" font-size="13">{_esc(xlabel)}</text>')
    out.append(
        f'<text x="18" y="{MARGIN_T + ph / 2:.0f}" text-anchor="middle" font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 18 {MARGIN_T + ph / 2:.0f})">{_esc(ylabel + (" (log10)" if log_y else ""))}</text>'
    )
    for j, k in enumerate(names):
        pts = " ".join(f"{_fmt(px(t + 1))},{_fmt(py(y))}" for t, y in enumerate(ys[k]))
        color = COLORS[j % len(COLORS)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(
            f'<text x="{MARGIN_L + pw - 10}" y="{MARGIN_T + 16 + 16 * j}" text-anchor="end" font-family="sans-serif" '
            f'font-size="12" fill="{color}">{_esc(k)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
