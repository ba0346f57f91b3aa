"""Minimal SVG emission for visual checks.

Ground-truth outlines are drawn in green, fitted or predicted outlines in
red; coordinates are absolute pixels, formatted with the shared 9-digit
formatter so files are byte-stable.
"""

from __future__ import annotations

from .serialize import fmt9

__all__ = ["render_svg", "GT_COLOR", "FIT_COLOR"]

GT_COLOR = "#00a000"
FIT_COLOR = "#d00000"


def _polygon(points, color: str) -> str:
    coords = " ".join(f"{fmt9(x)},{fmt9(y)}" for x, y in points)
    return (
        f'<polygon points="{coords}" fill="none" '
        f'stroke="{color}" stroke-width="1.5"/>'
    )


def render_svg(width: int, height: int, green_polygons, red_polygons) -> str:
    """One SVG document: green outlines under red ones."""
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">'
    ]
    for pts in green_polygons:
        parts.append(_polygon(pts, GT_COLOR))
    for pts in red_polygons:
        parts.append(_polygon(pts, FIT_COLOR))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
