"""Hand-rolled SVG figures.

Rendering is pure string assembly with fixed formatting, so a given
input always produces byte-identical output (matplotlib and friends do
not guarantee that across versions).
"""

from __future__ import annotations

from .stepfun import StepFunction

_W, _H = 640, 400
_ML, _MR, _MT, _MB = 70, 20, 40, 50
_PALETTE = ["#1965b0", "#dc050c", "#4eb265", "#f7a600", "#882e72", "#777777"]


def _fmt(v: float) -> str:
    return format(float(v), ".6g")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _frame(title: str, xlabel: str, ylabel: str, xticks, yticks, to_x, to_y) -> list[str]:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" font-size="15">{title}</text>',
    ]
    x0, x1 = _ML, _W - _MR
    y0, y1 = _H - _MB, _MT
    parts.append(
        f'<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>'
    )
    for t in xticks:
        px = to_x(t)
        parts.append(f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" y2="{y0 + 4}" stroke="black"/>')
        parts.append(
            f'<text x="{px:.2f}" y="{y0 + 18}" text-anchor="middle">{_fmt(t)}</text>'
        )
    for t in yticks:
        py = to_y(t)
        parts.append(f'<line x1="{x0 - 4}" y1="{py:.2f}" x2="{x0}" y2="{py:.2f}" stroke="black"/>')
        parts.append(
            f'<text x="{x0 - 8}" y="{py + 4:.2f}" text-anchor="end">{_fmt(t)}</text>'
        )
    parts.append(
        f'<text x="{(x0 + x1) / 2:.1f}" y="{_H - 12}" text-anchor="middle">{xlabel}</text>'
    )
    parts.append(
        f'<text x="18" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {(y0 + y1) / 2:.1f})">{ylabel}</text>'
    )
    return parts


def step_chart(
    curves: list[tuple[str, StepFunction]],
    title: str,
    xlabel: str = "time",
    ylabel: str = "survival probability",
    y_range: tuple[float, float] = (0.0, 1.0),
) -> str:
    """Right-continuous step plot of one or more named curves."""
    xmax = max((float(f.times[-1]) for _, f in curves if f.times.size), default=1.0)
    xmax = xmax * 1.05 if xmax > 0 else 1.0
    ylo, yhi = y_range
    x0, x1 = _ML, _W - _MR
    y0, y1 = _H - _MB, _MT

    def to_x(v):
        return x0 + (v / xmax) * (x1 - x0)

    def to_y(v):
        return y0 - (v - ylo) / (yhi - ylo) * (y0 - y1)

    parts = _frame(title, xlabel, ylabel, _ticks(0.0, xmax), _ticks(ylo, yhi), to_x, to_y)
    for ci, (label, f) in enumerate(curves):
        color = _PALETTE[ci % len(_PALETTE)]
        pts = [(0.0, f.initial)]
        prev = f.initial
        for t, v in zip(f.times, f.values):
            pts.append((float(t), prev))
            pts.append((float(t), float(v)))
            prev = float(v)
        pts.append((xmax / 1.05, prev))
        d = " ".join(
            ("M" if i == 0 else "L") + f"{to_x(px):.2f} {to_y(py):.2f}"
            for i, (px, py) in enumerate(pts)
        )
        parts.append(f'<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = _MT + 16 + 16 * ci
        parts.append(
            f'<line x1="{x1 - 150}" y1="{ly - 4}" x2="{x1 - 130}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(f'<text x="{x1 - 124}" y="{ly}">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def bar_chart(
    rows: list[tuple[str, float]],
    title: str,
    xlabel: str,
) -> str:
    """Horizontal bars, one per labeled value; negative values extend left
    of the zero line. Row order is preserved top to bottom."""
    n = max(len(rows), 1)
    lo = min(0.0, min((v for _, v in rows), default=0.0))
    hi = max(0.0, max((v for _, v in rows), default=1.0))
    if hi == lo:
        hi = lo + 1.0
    span = hi - lo
    lo, hi = lo - 0.05 * span, hi + 0.05 * span
    x0, x1 = _ML + 70, _W - _MR
    y0, y1 = _H - _MB, _MT

    def to_x(v):
        return x0 + (v - lo) / (hi - lo) * (x1 - x0)

    def to_y(v):
        return y0 - v * (y0 - y1)

    parts = _frame(title, xlabel, "", _ticks(lo, hi), [], to_x, to_y)
    zero_x = to_x(0.0)
    parts.append(
        f'<line x1="{zero_x:.2f}" y1="{y1}" x2="{zero_x:.2f}" y2="{y0}" '
        f'stroke="#aaaaaa" stroke-dasharray="3 3"/>'
    )
    slot = (y0 - y1) / n
    bar_h = max(min(slot * 0.7, 24.0), 2.0)
    for i, (label, v) in enumerate(rows):
        cy = y1 + slot * (i + 0.5)
        px = to_x(v)
        left, width = (min(px, zero_x), abs(px - zero_x))
        color = _PALETTE[0] if v >= 0 else _PALETTE[1]
        parts.append(
            f'<rect x="{left:.2f}" y="{cy - bar_h / 2:.2f}" width="{width:.2f}" '
            f'height="{bar_h:.2f}" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{x0 - 6}" y="{cy + 4:.2f}" text-anchor="end">{label}</text>'
        )
        anchor_x = max(px, zero_x) + 4
        parts.append(f'<text x="{anchor_x:.2f}" y="{cy + 4:.2f}">{_fmt(v)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
