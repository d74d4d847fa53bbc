"""Minimal self-contained SVG line charts (no plotting dependency).

Good enough for run artifacts: multiple series, optional stepped band
overlays (feasibility ranges), linear axes with tick labels and a legend.
CSV is always emitted alongside, so anyone needing more can replot.
"""

from __future__ import annotations

import math

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def _ticks(lo: float, hi: float, n: int = 6):
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    out = []
    x = start
    while x <= hi + 1e-9 * step:
        out.append(round(x, 12))
        x += step
    return out or [lo]


def _fmt(x: float) -> str:
    if x == 0:
        return "0"
    if abs(x) >= 1e4 or abs(x) < 1e-3:
        return f"{x:.2e}"
    return f"{x:.4g}"


def plot_lines(path, x, series, title="", xlabel="t [s]", ylabel="",
               bands=None, size=(860, 420)):
    """Write one SVG line chart.

    series: list of (label, y-array).  bands: optional list of
    (t_start, t_end, lo, hi) rectangles drawn behind the curves.
    """
    W, H = size
    ml, mr, mt, mb = 72, 16, 34, 44
    pw, ph = W - ml - mr, H - mt - mb
    xs = [float(v) for v in x]
    ys_all = [float(v) for _, ser in series for v in ser if math.isfinite(v)]
    if bands:
        for _, _, lo, hi in bands:
            ys_all += [lo, hi]
    if not xs or not ys_all:
        xs, ys_all = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys_all), max(ys_all)
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y0, y1 = y0 - 1.0, y1 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def X(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def Y(v):
        return mt + ph - (v - y0) / (y1 - y0) * ph

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
             f'font-family="sans-serif" font-size="12">',
             f'<rect width="{W}" height="{H}" fill="white"/>']
    if bands:
        for (ta, tb, lo, hi) in bands:
            ya, yb = Y(min(hi, y1)), Y(max(lo, y0))
            parts.append(f'<rect x="{X(max(ta, x0)):.1f}" y="{ya:.1f}" '
                         f'width="{max(X(min(tb, x1)) - X(max(ta, x0)), 0):.1f}" '
                         f'height="{max(yb - ya, 0):.1f}" fill="#cfe8cf" opacity="0.6"/>')
    for tx in _ticks(x0, x1):
        parts.append(f'<line x1="{X(tx):.1f}" y1="{mt}" x2="{X(tx):.1f}" '
                     f'y2="{mt + ph}" stroke="#eeeeee"/>')
        parts.append(f'<text x="{X(tx):.1f}" y="{mt + ph + 16}" '
                     f'text-anchor="middle">{_fmt(tx)}</text>')
    for ty in _ticks(y0, y1):
        parts.append(f'<line x1="{ml}" y1="{Y(ty):.1f}" x2="{ml + pw}" '
                     f'y2="{Y(ty):.1f}" stroke="#eeeeee"/>')
        parts.append(f'<text x="{ml - 6}" y="{Y(ty) + 4:.1f}" '
                     f'text-anchor="end">{_fmt(ty)}</text>')
    parts.append(f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" '
                 f'fill="none" stroke="#444444"/>')
    for idx, (label, ser) in enumerate(series):
        color = _COLORS[idx % len(_COLORS)]
        pts = []
        for xv, yv in zip(xs, ser):
            yv = float(yv)
            if math.isfinite(yv):
                pts.append(f"{X(xv):.1f},{Y(min(max(yv, y0), y1)):.1f}")
        parts.append(f'<polyline points="{" ".join(pts)}" fill="none" '
                     f'stroke="{color}" stroke-width="1.4"/>')
        lx = ml + 10 + 150 * idx
        parts.append(f'<line x1="{lx}" y1="{mt - 18}" x2="{lx + 22}" '
                     f'y2="{mt - 18}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 27}" y="{mt - 14}">{label}</text>')
    parts.append(f'<text x="{ml}" y="{16}" font-size="14">{title}</text>')
    parts.append(f'<text x="{ml + pw / 2:.0f}" y="{H - 8}" '
                 f'text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="16" y="{mt + ph / 2:.0f}" text-anchor="middle" '
                 f'transform="rotate(-90 16 {mt + ph / 2:.0f})">{ylabel}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))
