"""Static SVG pictures of rotor configurations and boundary measures.

Output is plain text assembled with fixed number formatting, so identical
inputs give byte-identical files.
"""

from __future__ import annotations

from typing import Iterable, Mapping

from .geometry import Direction, Vertex

CELL = 24
ARROW = 0.42


def _frame(vertices: Iterable[Vertex], pad: int = 1) -> tuple[int, int, int, int]:
    vs = list(vertices) or [(0, 0)]
    xs = [v[0] for v in vs]
    ys = [v[1] for v in vs]
    return min(xs) - pad, max(xs) + pad, min(ys) - pad, max(ys) + pad


def _shade(k: int, kmax: int) -> str:
    if kmax <= 0:
        return "#f2f2f2"
    t = k / kmax
    g = int(round(242 - 150 * t))
    return f"#{g:02x}{g:02x}ff"


def render_configuration(
    cluster: Iterable[Vertex],
    rotors: Mapping[Vertex, Direction],
    odometer: Mapping[Vertex, int] | None = None,
    labels: bool = True,
    title: str = "",
) -> str:
    """Cluster cells shaded by odometer, a rotor arrow on every cluster vertex."""
    cluster = sorted(set(cluster))
    odometer = odometer or {}
    x0, x1, y0, y1 = _frame(cluster)
    width = (x1 - x0 + 1) * CELL
    height = (y1 - y0 + 1) * CELL + (CELL if title else 0)

    def px(x: int) -> float:
        return (x - x0 + 0.5) * CELL

    def py(y: int) -> float:
        return (y1 - y + 0.5) * CELL + (CELL if title else 0)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="9">',
        '<defs><marker id="tip" markerWidth="6" markerHeight="6" refX="5" refY="3" orient="auto">'
        '<path d="M0,0 L6,3 L0,6 z" fill="#000"/></marker></defs>',
    ]
    if title:
        out.append(f'<text x="4" y="{CELL * 0.7:.1f}" font-size="12">{title}</text>')
    for x in range(x0, x1 + 1):
        out.append(
            f'<line x1="{px(x):.1f}" y1="{py(y1):.1f}" x2="{px(x):.1f}" y2="{py(y0):.1f}" '
            'stroke="#ccc" stroke-dasharray="1,3"/>'
        )
    out.append(
        f'<line x1="{px(x0):.1f}" y1="{py(0):.1f}" x2="{px(x1):.1f}" y2="{py(0):.1f}" '
        'stroke="#ccc" stroke-dasharray="1,3"/>'
    )
    kmax = max(odometer.values(), default=0)
    for v in cluster:
        k = odometer.get(v, 0)
        out.append(
            f'<rect x="{px(v[0]) - CELL / 2 + 1:.1f}" y="{py(v[1]) - CELL / 2 + 1:.1f}" '
            f'width="{CELL - 2}" height="{CELL - 2}" fill="{_shade(k, kmax)}"/>'
        )
    for v in cluster:
        dx, dy = Direction(rotors[v]).step
        cx, cy = px(v[0]), py(v[1])
        out.append(
            f'<line x1="{cx:.1f}" y1="{cy:.1f}" x2="{cx + dx * ARROW * CELL:.1f}" '
            f'y2="{cy - dy * ARROW * CELL:.1f}" stroke="#000" stroke-width="1.2" marker-end="url(#tip)"/>'
        )
        if labels and v in odometer:
            out.append(f'<text x="{cx + 3:.1f}" y="{cy - 3:.1f}">{odometer[v]}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_measure(boundary_nu: Mapping[Vertex, float], shape: Iterable[Vertex], title: str = "") -> str:
    """Shape cells in grey, boundary vertices as discs with area proportional to mass."""
    shape = sorted(set(shape))
    x0, x1, y0, y1 = _frame(shape)
    width = (x1 - x0 + 1) * CELL
    height = (y1 - y0 + 1) * CELL + (CELL if title else 0)
    off = CELL if title else 0
    numax = max((float(p) for p in boundary_nu.values()), default=0.0) or 1.0
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="9">'
    ]
    if title:
        out.append(f'<text x="4" y="{CELL * 0.7:.1f}" font-size="12">{title}</text>')
    for x, y in shape:
        out.append(
            f'<rect x="{(x - x0) * CELL + 1}" y="{(y1 - y) * CELL + 1 + off}" '
            f'width="{CELL - 2}" height="{CELL - 2}" fill="#eee"/>'
        )
    for (x, y), p in sorted(boundary_nu.items()):
        r = 0.45 * CELL * (float(p) / numax) ** 0.5
        out.append(
            f'<circle cx="{(x - x0 + 0.5) * CELL:.1f}" cy="{(y1 - y + 0.5) * CELL + off:.1f}" '
            f'r="{r:.2f}" fill="#c33"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
