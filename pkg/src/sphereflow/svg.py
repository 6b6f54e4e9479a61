"""Minimal dependency-free SVG line charts: one polyline per series."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 720, 480
MARGIN = 64
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")


def _transform(values, lo, hi, out_lo, out_hi):
    span = hi - lo if hi > lo else 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in values]


def line_chart(
    series: dict[str, tuple[list[float], list[float]]],
    x_label: str,
    y_label: str,
    log_x: bool = False,
    log_y: bool = False,
    reference: tuple[str, list[float], list[float]] | None = None,
    title: str = "",
) -> str:
    """Render named (x, y) series; an optional reference series is drawn dashed."""

    def tx(vals):
        return [math.log10(v) for v in vals] if log_x else list(vals)

    def ty(vals):
        return [math.log10(v) for v in vals] if log_y else list(vals)

    all_x, all_y = [], []
    drawn = [(name, tx(xs), ty(ys), False) for name, (xs, ys) in series.items()]
    if reference is not None:
        name, xs, ys = reference
        drawn.append((name, tx(xs), ty(ys), True))
    for _, xs, ys, _dash in drawn:
        all_x.extend(xs)
        all_y.extend(ys)
    x_lo, x_hi = min(all_x), max(all_x)
    y_lo, y_hi = min(all_y), max(all_y)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<text x="{WIDTH // 2}" y="{HEIGHT - 16}" text-anchor="middle" font-size="14">{escape(x_label)}</text>',
        f'<text x="18" y="{HEIGHT // 2}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 18 {HEIGHT // 2})">{escape(y_label)}</text>',
    ]
    if title:
        parts.append(f'<text x="{WIDTH // 2}" y="28" text-anchor="middle" font-size="16">{escape(title)}</text>')
    legend_y = MARGIN
    for i, (name, xs, ys, dashed) in enumerate(drawn):
        px = _transform(xs, x_lo, x_hi, MARGIN, WIDTH - MARGIN)
        py = _transform(ys, y_lo, y_hi, HEIGHT - MARGIN, MARGIN)
        points = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(px, py))
        color = "#555555" if dashed else PALETTE[i % len(PALETTE)]
        dash = ' stroke-dasharray="8,5"' if dashed else ""
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.8"{dash} points="{points}"/>')
        parts.append(
            f'<text x="{WIDTH - MARGIN - 4}" y="{legend_y}" text-anchor="end" font-size="12" '
            f'fill="{color}">{escape(name)}</text>'
        )
        legend_y += 18
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
