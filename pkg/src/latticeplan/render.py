"""SVG rendering of occupancy grids with overlaid lattice paths.

Node ``(x, y)`` is drawn at pixel ``(x * cell, (n - 1 - y) * cell)`` so the
origin sits at the bottom-left; the view box is padded by half a cell.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape, quoteattr

from .codec import LatticePath
from .gridmap import OccupancyGrid


@dataclass(frozen=True)
class RenderSpec:
    cell: int = 10
    obstacle_fill: str = "#333333"
    background: str = "#ffffff"
    stroke: str = "#1f4e9e"
    stroke_width: float = 2.0
    path_opacity: float = 0.15


def _px(n: int, cell: int, x: int, y: int) -> tuple[int, int]:
    return x * cell, (n - 1 - y) * cell


def render_svg(grid: OccupancyGrid, paths: Sequence[LatticePath] = (),
               spec: RenderSpec = RenderSpec(), title: str | None = None) -> str:
    n, c = grid.n, spec.cell
    half = c / 2
    size = n * c
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" '
        f'viewBox="{-half:g} {-half:g} {size} {size}">',
    ]
    if title is not None:
        out.append(f"<title>{escape(title)}</title>")
    out.append(f'<rect x="{-half:g}" y="{-half:g}" width="{size}" height="{size}" '
               f'fill={quoteattr(spec.background)}/>')
    out.append(f'<g id="obstacles" fill={quoteattr(spec.obstacle_fill)}>')
    # one rect per horizontal run of occupied cells keeps files small
    for y in range(n):
        row = grid.cells[y]
        x = 0
        while x < n:
            if row[x]:
                x0 = x
                while x < n and row[x]:
                    x += 1
                px, py = _px(n, c, x0, y)
                out.append(f'<rect x="{px - half:g}" y="{py - half:g}" '
                           f'width="{(x - x0) * c}" height="{c}"/>')
            else:
                x += 1
    out.append("</g>")
    out.append(f'<g id="paths" fill="none" stroke={quoteattr(spec.stroke)} '
               f'stroke-width="{spec.stroke_width:g}" stroke-linejoin="round">')
    for p in paths:
        pts = " ".join("%d,%d" % _px(n, c, x, y) for x, y in p.nodes)
        out.append(f'<polyline points="{pts}" stroke-opacity="{spec.path_opacity:g}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def polyline_nodes(svg: str, n: int, cell: int) -> list[list[tuple[int, int]]]:
    """Recover node coordinates from the polylines of a rendered SVG."""
    import xml.etree.ElementTree as ET

    root = ET.fromstring(svg.encode("utf-8"))
    out = []
    for el in root.iter("{http://www.w3.org/2000/svg}polyline"):
        nodes = []
        for pair in el.get("points").split():
            px, py = (int(v) for v in pair.split(","))
            nodes.append((px // cell, n - 1 - py // cell))
        out.append(nodes)
    return out
