"""Tiny SVG chart writer.

Hand-rolled so chart output is a pure function of its inputs: same data,
same bytes. Only what the pipeline needs: a grouped bar chart (monthwise
means) and a multi-series line chart (forecast paths vs actuals).
"""

from __future__ import annotations

import math

_COLORS = ("#4477aa", "#ee6677", "#228833", "#ccbb44")
_W, _H = 760, 420
_MARGIN = {"left": 64, "right": 16, "top": 40, "bottom": 56}


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def _frame(title: str, lo: float, hi: float, body: list[str], legend: list[str]) -> str:
    x0, y0 = _MARGIN["left"], _MARGIN["top"]
    x1, y1 = _W - _MARGIN["right"], _H - _MARGIN["bottom"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="20" text-anchor="middle" font-size="15">{title}</text>',
    ]
    for tick in _ticks(lo, hi):
        y = y1 - (tick - lo) / (hi - lo) * (y1 - y0)
        parts.append(f'<line x1="{x0}" y1="{_fmt(y)}" x2="{x1}" y2="{_fmt(y)}" stroke="#ddd"/>')
        parts.append(
            f'<text x="{x0 - 6}" y="{_fmt(y + 4)}" text-anchor="end">{_fmt(tick)}</text>'
        )
    parts.extend(body)
    parts.append(f'<line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}" stroke="#333"/>')
    parts.extend(legend)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _legend(names: list[str]) -> list[str]:
    out = []
    x = _MARGIN["left"]
    for i, name in enumerate(names):
        color = _COLORS[i % len(_COLORS)]
        out.append(f'<rect x="{x}" y="{_H - 22}" width="12" height="12" fill="{color}"/>')
        out.append(f'<text x="{x + 16}" y="{_H - 12}">{name}</text>')
        x += 16 + 8 * len(name) + 24
    return out


def _bounds(series: dict[str, list[float]]) -> tuple[float, float]:
    values = [v for vs in series.values() for v in vs if math.isfinite(v)]
    if not values:
        raise ValueError("no finite values to plot")
    lo, hi = min(values), max(values)
    pad = (hi - lo) * 0.05 or abs(hi) * 0.05 or 1.0
    return lo - pad, hi + pad


def bar_chart_svg(title: str, labels: list[str], series: dict[str, list[float]]) -> str:
    """Grouped vertical bars; one group per label, one bar per series."""
    if not series or not labels:
        raise ValueError("bar chart needs at least one label and one series")
    for name, vs in series.items():
        if len(vs) != len(labels):
            raise ValueError(f"series {name!r} has {len(vs)} values for {len(labels)} labels")
    lo, hi = _bounds(series)
    lo = min(lo, 0.0)
    x0, y0 = _MARGIN["left"], _MARGIN["top"]
    x1, y1 = _W - _MARGIN["right"], _H - _MARGIN["bottom"]
    group_w = (x1 - x0) / len(labels)
    bar_w = group_w * 0.8 / len(series)

    def ypix(v: float) -> float:
        return y1 - (v - lo) / (hi - lo) * (y1 - y0)

    body = []
    for gi, label in enumerate(labels):
        gx = x0 + gi * group_w
        for si, (name, vs) in enumerate(series.items()):
            bx = gx + group_w * 0.1 + si * bar_w
            top = ypix(vs[gi])
            base = ypix(max(lo, 0.0))
            y, h = (top, base - top) if top <= base else (base, top - base)
            body.append(
                f'<rect x="{_fmt(bx)}" y="{_fmt(y)}" width="{_fmt(bar_w)}" '
                f'height="{_fmt(h)}" fill="{_COLORS[si % len(_COLORS)]}"/>'
            )
        body.append(
            f'<text x="{_fmt(gx + group_w / 2)}" y="{y1 + 16}" text-anchor="middle">{label}</text>'
        )
    return _frame(title, lo, hi, body, _legend(list(series)))


def line_chart_svg(title: str, x_labels: list[str], series: dict[str, list[float]]) -> str:
    """One polyline per series over a shared categorical x axis."""
    if not series or len(x_labels) < 2:
        raise ValueError("line chart needs at least one series and two x positions")
    for name, vs in series.items():
        if len(vs) != len(x_labels):
            raise ValueError(f"series {name!r} has {len(vs)} values for {len(x_labels)} labels")
    lo, hi = _bounds(series)
    x0, y0 = _MARGIN["left"], _MARGIN["top"]
    x1, y1 = _W - _MARGIN["right"], _H - _MARGIN["bottom"]
    dx = (x1 - x0) / (len(x_labels) - 1)

    body = []
    for si, (name, vs) in enumerate(series.items()):
        color = _COLORS[si % len(_COLORS)]
        # non-finite values break the line into separate segments
        segment: list[str] = []
        segments: list[list[str]] = []
        for i, v in enumerate(vs):
            if math.isfinite(v):
                segment.append(
                    f"{_fmt(x0 + i * dx)},{_fmt(y1 - (v - lo) / (hi - lo) * (y1 - y0))}"
                )
            elif segment:
                segments.append(segment)
                segment = []
        if segment:
            segments.append(segment)
        for seg in segments:
            if len(seg) == 1:
                cx, cy = seg[0].split(",")
                body.append(f'<circle cx="{cx}" cy="{cy}" r="2" fill="{color}"/>')
            else:
                body.append(
                    f'<polyline points="{" ".join(seg)}" fill="none" '
                    f'stroke="{color}" stroke-width="1.5"/>'
                )
    step = max(1, len(x_labels) // 8)
    for i in range(0, len(x_labels), step):
        body.append(
            f'<text x="{_fmt(x0 + i * dx)}" y="{y1 + 16}" text-anchor="middle" '
            f'font-size="10">{x_labels[i]}</text>'
        )
    return _frame(title, lo, hi, body, _legend(list(series)))
