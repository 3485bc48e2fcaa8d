"""Minimal SVG line and scatter plots (axes, polylines, markers)."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2")
W, H = 640, 420
ML, MR, MT, MB = 70, 20, 40, 55


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    step = 10 ** np.floor(np.log10((hi - lo) / n))
    for m in (1, 2, 5, 10):
        if (hi - lo) / (m * step) <= n:
            step *= m
            break
    return np.arange(np.ceil(lo / step) * step, hi + 1e-12 * step, step)


def _limits(values) -> tuple[float, float]:
    v = np.concatenate([np.asarray(x, dtype=float).ravel() for x in values])
    v = v[np.isfinite(v)]
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if hi - lo < 1e-12 * max(1.0, abs(hi)):
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.03 * (hi - lo)
    return lo - pad, hi + pad


def plot(path, series, title: str = "", xlabel: str = "", ylabel: str = "", equal: bool = False) -> Path:
    """Write an SVG with one element per series.

    ``series`` holds dicts with keys ``x``, ``y``, optional ``label`` and
    ``style`` (``line`` or ``points``).
    """
    xs = [s["x"] for s in series]
    ys = [s["y"] for s in series]
    x0, x1 = _limits(xs)
    y0, y1 = _limits(ys)
    if equal:
        lo, hi = min(x0, y0), max(x1, y1)
        x0 = y0 = lo
        x1 = y1 = hi
    pw, ph = W - ML - MR, H - MT - MB

    def px(x):
        return ML + (np.asarray(x, dtype=float) - x0) / (x1 - x0) * pw

    def py(y):
        return MT + ph - (np.asarray(y, dtype=float) - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _ticks(x0, x1):
        X = float(px(t))
        out.append(f'<line x1="{X:.1f}" y1="{MT + ph}" x2="{X:.1f}" y2="{MT + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.1f}" y="{MT + ph + 18}" font-size="11" text-anchor="middle">{t:.4g}</text>')
    for t in _ticks(y0, y1):
        Y = float(py(t))
        out.append(f'<line x1="{ML - 5}" y1="{Y:.1f}" x2="{ML}" y2="{Y:.1f}" stroke="black"/>')
        out.append(f'<text x="{ML - 8}" y="{Y + 4:.1f}" font-size="11" text-anchor="end">{t:.4g}</text>')
    out.append(f'<text x="{W / 2}" y="22" font-size="14" text-anchor="middle">{escape(title)}</text>')
    out.append(f'<text x="{ML + pw / 2}" y="{H - 12}" font-size="12" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{MT + ph / 2}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 16 {MT + ph / 2})">{escape(ylabel)}</text>')
    for i, s in enumerate(series):
        color = s.get("color", _COLORS[i % len(_COLORS)])
        x = np.asarray(s["x"], dtype=float)
        y = np.asarray(s["y"], dtype=float)
        ok = np.isfinite(x) & np.isfinite(y)
        X, Y = px(x[ok]), py(y[ok])
        if s.get("style", "line") == "points":
            out.extend(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="2.5" fill="{color}"/>' for a, b in zip(X, Y))
        elif X.size:
            pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(X, Y))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.3"/>')
        if s.get("label"):
            ly = MT + 14 + 15 * i
            out.append(f'<text x="{ML + pw - 8}" y="{ly}" font-size="11" text-anchor="end" fill="{color}">'
                       f'{escape(s["label"])}</text>')
    out.append("</svg>")
    p = Path(path)
    p.write_text("\n".join(out) + "\n")
    return p
