"""ROC plots as standalone SVG built from lines, polylines and text."""

from __future__ import annotations

from xml.sax.saxutils import escape

WIDTH = 480
HEIGHT = 480
MARGIN = 60
COLORS = ("#1f5fa8", "#c2410c", "#15803d", "#7e22ce", "#334155")


def _x(p: float) -> float:
    return MARGIN + p * (WIDTH - 2 * MARGIN)


def _y(p: float) -> float:
    return HEIGHT - MARGIN - p * (HEIGHT - 2 * MARGIN)


def roc_svg(curves, title: str = "ROC") -> str:
    """``curves``: iterable of ``(label, RocCurve)``; axes are P_F (x) and P_V (y)."""
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="{MARGIN / 2}" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    for i in range(11):
        t = i / 10
        out.append(f'<line x1="{_x(t):.1f}" y1="{_y(0):.1f}" x2="{_x(t):.1f}" y2="{_y(1):.1f}" stroke="#e5e7eb"/>')
        out.append(f'<line x1="{_x(0):.1f}" y1="{_y(t):.1f}" x2="{_x(1):.1f}" y2="{_y(t):.1f}" stroke="#e5e7eb"/>')
        out.append(f'<text x="{_x(t):.1f}" y="{_y(0) + 16:.1f}" text-anchor="middle">{t:.1f}</text>')
        out.append(f'<text x="{_x(0) - 6:.1f}" y="{_y(t) + 4:.1f}" text-anchor="end">{t:.1f}</text>')
    out.append(f'<line x1="{_x(0)}" y1="{_y(0)}" x2="{_x(1)}" y2="{_y(1)}" stroke="#9ca3af" stroke-dasharray="4 4"/>')
    out.append(f'<rect x="{_x(0)}" y="{_y(1)}" width="{_x(1) - _x(0)}" height="{_y(0) - _y(1)}" fill="none" stroke="black"/>')
    out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 18}" text-anchor="middle">false alarm rate P_F</text>')
    out.append(
        f'<text x="18" y="{HEIGHT / 2}" text-anchor="middle" transform="rotate(-90 18 {HEIGHT / 2})">'
        "verification rate P_V</text>"
    )
    for k, (label, roc) in enumerate(curves):
        color = COLORS[k % len(COLORS)]
        pts = " ".join(f"{_x(pf):.2f},{_y(pv):.2f}" for pf, pv in roc.points)
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        ly = _y(0) - 14 - 16 * k
        out.append(f'<line x1="{_x(0.6)}" y1="{ly}" x2="{_x(0.68)}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{_x(0.7)}" y="{ly + 4}">{escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_roc_svg(path, curves, title: str = "ROC") -> None:
    with open(path, "w") as fh:
        fh.write(roc_svg(curves, title))
