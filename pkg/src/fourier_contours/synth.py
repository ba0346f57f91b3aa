"""Deterministic synthetic shape and corpus generators.

Everything here is seeded and platform-stable; corpora used by the test
suite are reproduced exactly from the seed, never stored as data files.
Shapes mimic scene-text outlines: wavy ribbons (curved lines of text),
blocky 14-point rectangles, ellipses, and regular polygons.
"""

from __future__ import annotations

import numpy as np

from .annotations import AnnotatedImage, TextInstance
from .geometry import Contour

__all__ = [
    "regular_polygon",
    "ellipse_polygon",
    "ribbon",
    "rect14",
    "star_polygon",
    "compactness_corpus",
    "subset_instances",
    "roundtrip_corpus",
]


def regular_polygon(cx: float, cy: float, r: float, n: int = 64, phase: float = 0.0) -> Contour:
    ang = phase + 2.0 * np.pi * np.arange(n) / n
    return Contour(np.stack([cx + r * np.cos(ang), cy + r * np.sin(ang)], axis=1))


def ellipse_polygon(
    cx: float, cy: float, rx: float, ry: float, n: int = 64, rot: float = 0.0
) -> Contour:
    ang = 2.0 * np.pi * np.arange(n) / n
    x = rx * np.cos(ang)
    y = ry * np.sin(ang)
    cr, sr = np.cos(rot), np.sin(rot)
    return Contour(np.stack([cx + x * cr - y * sr, cy + x * sr + y * cr], axis=1))


def ribbon(
    cx: float,
    cy: float,
    length: float,
    thickness: float,
    amplitude: float,
    cycles: float = 1.0,
    phase: float = 0.0,
    points_per_edge: int = 24,
) -> Contour:
    """Wavy text-line shape: a sinusoidal baseline swept by a constant height.

    Vertices run left to right along the top edge, then right to left along
    the bottom, which is visually clockwise in the y-down frame.
    """
    u = np.linspace(0.0, 1.0, points_per_edge)
    x = cx - length / 2.0 + u * length
    base = cy + amplitude * np.sin(2.0 * np.pi * cycles * u + phase)
    top = np.stack([x, base - thickness / 2.0], axis=1)
    bottom = np.stack([x, base + thickness / 2.0], axis=1)
    return Contour(np.concatenate([top, bottom[::-1]], axis=0))


def rect14(x0: float, y0: float, w: float, h: float) -> Contour:
    """Axis-aligned rectangle annotated with 14 points, as a polygon annotator
    restricted to a fixed point budget would: corners opposite the start are
    doubled, interior points sit on the long edges.  Every vertex the subset
    rule may delete (head and tail are exempt) is then doubled or collinear,
    so the max removal delta is exactly zero."""
    xs = x0 + w * np.arange(1, 5) / 5.0
    top = [(x0, y0)] + [(x, y0) for x in xs] + [(x0 + w, y0), (x0 + w, y0)]
    bottom = [(x0 + w, y0 + h), (x0 + w, y0 + h)] + [
        (x, y0 + h) for x in xs[::-1]
    ] + [(x0, y0 + h)]
    return Contour(np.asarray(top + bottom, dtype=np.float64))


def star_polygon(rng: np.random.Generator, cx: float, cy: float, r_lo: float, r_hi: float, n: int) -> Contour:
    """Random star-shaped polygon: strictly increasing angles, random radii.
    Always simple, nonzero area, in generic position."""
    ang = np.sort(rng.uniform(0.0, 2.0 * np.pi, size=n))
    # enforce distinct angles so edges are never degenerate
    while np.any(np.diff(ang) < 1e-4):
        ang = np.sort(rng.uniform(0.0, 2.0 * np.pi, size=n))
    rad = rng.uniform(r_lo, r_hi, size=n)
    return Contour(np.stack([cx + rad * np.cos(ang), cy + rad * np.sin(ang)], axis=1))


def compactness_corpus(seed: int = 20240601, count: int = 50) -> list[AnnotatedImage]:
    """Curved text-like ribbons with sinusoidal baselines, one per image.

    Moderate curvature and generous thickness: shapes a low-degree signature
    is expected to represent well.
    """
    rng = np.random.default_rng(seed)
    images = []
    for i in range(count):
        length = rng.uniform(200.0, 340.0)
        thickness = rng.uniform(0.22, 0.4) * length
        amplitude = rng.uniform(0.06, 0.16) * length
        cycles = rng.uniform(0.5, 1.2)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        poly = ribbon(
            cx=256.0,
            cy=256.0,
            length=length,
            thickness=thickness,
            amplitude=amplitude,
            cycles=cycles,
            phase=phase,
            points_per_edge=40,
        )
        images.append(
            AnnotatedImage(
                image_id=f"ribbon{i:03d}",
                width=512,
                height=512,
                instances=(TextInstance(polygon=poly, id="i0"),),
            )
        )
    return images


def subset_instances(seed: int = 20240602) -> tuple[list[TextInstance], list[TextInstance]]:
    """(rectangles, curved ribbons) for exercising the curved-subset rule.

    The rectangles have max vertex-removal delta exactly 0.  The ribbons are
    strongly bent with a sparse point budget, so removing a mid-arc vertex
    costs a fifth or more of the area.
    """
    rng = np.random.default_rng(seed)
    rects = []
    for i in range(10):
        x0 = rng.uniform(10.0, 60.0)
        y0 = rng.uniform(10.0, 60.0)
        w = rng.uniform(120.0, 300.0)
        h = rng.uniform(20.0, 60.0)
        rects.append(TextInstance(polygon=rect14(x0, y0, w, h), id=f"rect{i}"))
    ribbons = []
    for i in range(10):
        length = rng.uniform(220.0, 300.0)
        thickness = rng.uniform(0.035, 0.05) * length
        amplitude = rng.uniform(0.42, 0.55) * length
        cycles = rng.uniform(0.9, 1.1)
        poly = ribbon(
            cx=256.0,
            cy=256.0,
            length=length,
            thickness=thickness,
            amplitude=amplitude,
            cycles=cycles,
            phase=0.0,
            points_per_edge=7,
        )
        ribbons.append(TextInstance(polygon=poly, id=f"curve{i}"))
    return rects, ribbons


def _placed_instance(rng: np.random.Generator, kind: str, cx: float, cy: float, size: float) -> Contour:
    if kind == "ellipse":
        ry = size * rng.uniform(0.28, 0.45) / 2.0
        return ellipse_polygon(cx, cy, size / 2.0, ry, n=72, rot=rng.uniform(0.0, np.pi))
    if kind == "circle":
        return regular_polygon(cx, cy, size / 2.0, n=72)
    if kind == "rect":
        h = size * rng.uniform(0.25, 0.4)
        return rect14(cx - size / 2.0, cy - h / 2.0, size, h)
    thickness = size * rng.uniform(0.2, 0.3)
    amplitude = size * rng.uniform(0.05, 0.1)
    return ribbon(
        cx,
        cy,
        length=size,
        thickness=thickness,
        amplitude=amplitude,
        cycles=rng.uniform(0.6, 1.0),
        phase=rng.uniform(0.0, 2.0 * np.pi),
        points_per_edge=32,
    )


def roundtrip_corpus(seed: int = 20240603, count: int = 20, side: int = 512) -> list[AnnotatedImage]:
    """Multi-scale corpus for end-to-end target/decode/eval checks.

    Covers every stride range, including scales that belong to two adjacent
    ranges at once, plus a couple of do-not-care instances.  Instances within
    an image are spatially well separated.
    """
    rng = np.random.default_rng(seed)
    kinds = ["ellipse", "ribbon", "circle", "rect"]
    images = []
    for i in range(count):
        instances = []
        if i % 4 == 3:
            # one large instance spanning most of the image
            scale = rng.uniform(0.75, 0.92)
            kind = kinds[i % len(kinds)]
            poly = _placed_instance(rng, kind, side / 2.0, side / 2.0, scale * side)
            instances.append(TextInstance(polygon=poly, id="i0"))
        else:
            # small instance against the top, larger one against the bottom;
            # anchoring by half-size keeps both inside and disjoint
            scales = [rng.uniform(0.14, 0.26), rng.uniform(0.3, 0.4)]
            if i % 4 == 1:
                scales[1] = rng.uniform(0.6, 0.7)  # straddles the coarser ranges
            margin = 8.0
            for j, scale in enumerate(scales):
                size = scale * side
                if j == 0:
                    cy = margin + size / 2.0 + rng.uniform(0.0, 10.0)
                else:
                    cy = side - margin - size / 2.0 - rng.uniform(0.0, 10.0)
                cx = side / 2.0 + rng.uniform(-30.0, 30.0)
                kind = kinds[(i + j) % len(kinds)]
                poly = _placed_instance(rng, kind, cx, cy, size)
                instances.append(TextInstance(polygon=poly, id=f"i{j}"))
        if i % 5 == 2:
            # a do-not-care region tucked into a corner
            poly = rect14(6.0, 6.0, 46.0, 18.0)
            instances.append(TextInstance(polygon=poly, ignore=True, id="dc"))
        images.append(
            AnnotatedImage(
                image_id=f"img{i:03d}", width=side, height=side, instances=tuple(instances)
            )
        )
    return images
