"""Minimal self-contained SVG semilog plot of a per-pass norm sequence."""

from __future__ import annotations

import math

WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 80, 20, 40, 60


def semilog_svg(values, title: str, ylabel: str, xlabel: str = "pass k") -> str:
    vals = [float(v) for v in values]
    positive = [v for v in vals if v > 0 and math.isfinite(v)]
    if positive:
        lo = math.floor(math.log10(min(positive)))
        hi = math.ceil(math.log10(max(positive)))
    else:
        lo, hi = -1, 0
    if hi == lo:
        hi += 1
    floor_val = 10.0**lo
    kmax = max(len(vals) - 1, 1)
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def x(k):
        return LEFT + pw * k / kmax

    def y(v):
        v = max(v, floor_val)
        return TOP + ph * (hi - math.log10(v)) / (hi - lo)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="16">{_esc(title)}</text>',
        f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
    ]
    for d in range(lo, hi + 1):
        yy = y(10.0**d)
        out.append(f'<line x1="{LEFT - 5}" y1="{yy:.2f}" x2="{LEFT + pw}" y2="{yy:.2f}" '
                   'stroke="#dddddd"/>')
        out.append(f'<text x="{LEFT - 8}" y="{yy + 4:.2f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">1e{d}</text>')
    step = max(1, kmax // 10)
    for k in range(0, kmax + 1, step):
        out.append(f'<text x="{x(k):.2f}" y="{TOP + ph + 18}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{k}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="13">{_esc(xlabel)}</text>')
    out.append(f'<text x="18" y="{TOP + ph / 2:.1f}" text-anchor="middle" font-family="sans-serif" '
               f'font-size="13" transform="rotate(-90 18 {TOP + ph / 2:.1f})">{_esc(ylabel)}</text>')
    pts = " ".join(f"{x(k):.2f},{y(v):.2f}" for k, v in enumerate(vals) if math.isfinite(v))
    out.append(f'<polyline fill="none" stroke="#1f4e9c" stroke-width="2" points="{pts}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
