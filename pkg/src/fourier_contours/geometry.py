"""Planar polygon primitives in image pixel coordinates.

The frame follows image conventions: x grows rightward, y grows downward.
"Clockwise" always means visually clockwise on screen, which in this frame
is a positive shoelace sum over the raw coordinates.

Order-independent accumulations (fsum) are used for the perimeter, the
centroid, and the shoelace sum so that cyclically rotating or reversing the
vertex list of a contour cannot move any downstream decision by even one ulp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import DegenerateContour, InvalidPolygon, ZeroPerimeter

__all__ = [
    "Point2",
    "Contour",
    "ResampledContour",
    "signed_area",
    "perimeter",
    "contour_center",
    "canonical_start",
    "resample_equidistant",
    "shrink_polygon",
    "point_in_polygon",
    "rasterize_grid",
    "polygon_iou",
    "vertex_removal_delta",
]


class Point2(NamedTuple):
    x: float
    y: float


def _vertex_array(vertices, minimum: int = 3) -> np.ndarray:
    arr = np.array(vertices, dtype=np.float64, copy=True)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidPolygon(f"expected an (n, 2) vertex array, got shape {arr.shape}")
    if arr.shape[0] < minimum:
        raise InvalidPolygon(f"need at least {minimum} vertices, got {arr.shape[0]}")
    if not np.isfinite(arr).all():
        raise InvalidPolygon("coordinates must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Contour:
    """Closed polygon; the edge from the last vertex back to the first is implicit.

    Vertex count (>= 3) and finiteness are checked at construction.
    Zero-perimeter contours are representable, because a constant-term
    reconstruction legitimately collapses to one repeated point; operations
    that need arc length raise ZeroPerimeter instead of forbidding them here.
    """

    vertices: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", _vertex_array(self.vertices))

    @classmethod
    def from_flat(cls, coords: Iterable[float]) -> "Contour":
        flat = np.asarray(list(coords), dtype=np.float64)
        if flat.size % 2:
            raise InvalidPolygon("flat coordinate list must have an even length")
        return cls(flat.reshape(-1, 2))

    def flat(self) -> list[float]:
        return [float(v) for v in self.vertices.ravel()]

    def bounds(self) -> tuple[float, float, float, float]:
        """(min_x, min_y, max_x, max_y)."""
        v = self.vertices
        return (
            float(v[:, 0].min()),
            float(v[:, 1].min()),
            float(v[:, 0].max()),
            float(v[:, 1].max()),
        )

    def __len__(self) -> int:
        return int(self.vertices.shape[0])


@dataclass(frozen=True)
class ResampledContour:
    """Equidistant samples of a contour, visually clockwise, starting at the
    canonical start point.  points[j] is the sample at parameter t = j / n."""

    points: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", _vertex_array(self.points))

    @property
    def n(self) -> int:
        return int(self.points.shape[0])


# ---------------------------------------------------------------------------
# scalar measures


def _edges(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return v, np.roll(v, -1, axis=0)


def _signed_area(v: np.ndarray) -> float:
    a, b = _edges(v)
    # fsum: exactly rounded, so the value is identical for any cyclic rotation
    # or reversal of the vertex list.
    return 0.5 * math.fsum(a[:, 0] * b[:, 1] - b[:, 0] * a[:, 1])


def signed_area(c: Contour) -> float:
    """Shoelace sum; positive when the contour is visually clockwise (y-down)."""
    return _signed_area(c.vertices)


def _edge_lengths(v: np.ndarray) -> np.ndarray:
    a, b = _edges(v)
    return np.hypot(b[:, 0] - a[:, 0], b[:, 1] - a[:, 1])


def perimeter(c: Contour) -> float:
    return math.fsum(_edge_lengths(c.vertices))


def _center(v: np.ndarray) -> Point2:
    a, b = _edges(v)
    lengths = _edge_lengths(v)
    total = math.fsum(lengths)
    if total <= 0.0:
        raise ZeroPerimeter("contour has zero perimeter")
    mx = 0.5 * (a[:, 0] + b[:, 0])
    my = 0.5 * (a[:, 1] + b[:, 1])
    return Point2(math.fsum(mx * lengths) / total, math.fsum(my * lengths) / total)


def contour_center(c: Contour) -> Point2:
    """Arc-length weighted centroid of the boundary polyline.

    Weighting by edge length makes the center independent of how densely
    each stretch of the outline happens to be annotated.
    """
    return _center(c.vertices)


# ---------------------------------------------------------------------------
# canonical start and resampling


def _scan_crossings(v: np.ndarray, y: float) -> tuple[np.ndarray, np.ndarray]:
    """Edge indices and crossing parameters where the boundary crosses row y.

    Half-open rule: edge (a, b) crosses iff (a.y <= y) != (b.y <= y), so a
    vertex exactly on the row is counted once and horizontal edges never.
    """
    a, b = _edges(v)
    hit = (a[:, 1] <= y) != (b[:, 1] <= y)
    idx = np.nonzero(hit)[0]
    t = (y - a[idx, 1]) / (b[idx, 1] - a[idx, 1])
    return idx, t


def _canonical_start(v: np.ndarray) -> tuple[int, float]:
    cy = _center(v).y
    idx, t = _scan_crossings(v, cy)
    if idx.size == 0:
        raise DegenerateContour("no horizontal crossing through the center")
    a, b = _edges(v)
    x = a[idx, 0] + t * (b[idx, 0] - a[idx, 0])
    best = int(np.argmax(x))  # rightmost; argmax keeps the first on exact ties
    return int(idx[best]), float(t[best])


def canonical_start(c: Contour) -> tuple[int, float]:
    """Start point for sampling: the rightmost intersection of the horizontal
    line through the center with the contour, as (edge index, edge parameter)."""
    return _canonical_start(c.vertices)


def resample_equidistant(c: Contour, n: int) -> ResampledContour:
    """Resample to n points at equal arc spacing.

    The traversal is forced visually clockwise (vertex order reversed when the
    shoelace sum is negative) and starts at the canonical start point, which
    is emitted as points[0].  Sample j sits at arc position j * perimeter / n.
    """
    if n < 3:
        raise ValueError(f"need n >= 3 samples, got {n}")
    v = np.asarray(c.vertices)
    if _signed_area(v) < 0.0:
        v = v[::-1]
    e, t = _canonical_start(v)
    a, b = _edges(v)
    p0 = a[e] + t * (b[e] - a[e])
    m = v.shape[0]
    # Rebuild the cycle starting from the start point; every later computation
    # sees the same point sequence no matter how the input list was phased.
    cycle = np.empty((m + 2, 2), dtype=np.float64)
    cycle[0] = p0
    order = (np.arange(1, m + 1) + e) % m
    cycle[1:-1] = v[order]
    cycle[-1] = p0
    seg = np.hypot(np.diff(cycle[:, 0]), np.diff(cycle[:, 1]))
    cum = np.concatenate(([0.0], np.cumsum(seg)))
    total = cum[-1]
    if total <= 0.0:
        raise ZeroPerimeter("contour has zero perimeter")
    step = total / n
    targets = np.arange(n) * step
    seat = np.searchsorted(cum, targets, side="right") - 1
    seat = np.clip(seat, 0, seg.size - 1)
    denom = np.where(seg[seat] > 0.0, seg[seat], 1.0)
    frac = (targets - cum[seat]) / denom
    pts = cycle[seat] + frac[:, None] * (cycle[seat + 1] - cycle[seat])
    return ResampledContour(pts)


# ---------------------------------------------------------------------------
# inward offset


def _dedupe(v: np.ndarray) -> np.ndarray:
    keep = np.any(v != np.roll(v, 1, axis=0), axis=1)
    return v[keep] if keep.any() else v[:1]


def _segments_intersect(p0, p1, q0, q1) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(q0, q1, p0)
    d2 = orient(q0, q1, p1)
    d3 = orient(p0, p1, q0)
    d4 = orient(p0, p1, q1)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != d2 and d3 != d4:
        return True

    def on_seg(a, b, c):
        return (
            min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])
        )

    if d1 == 0 and on_seg(q0, q1, p0):
        return True
    if d2 == 0 and on_seg(q0, q1, p1):
        return True
    if d3 == 0 and on_seg(p0, p1, q0):
        return True
    if d4 == 0 and on_seg(p0, p1, q1):
        return True
    return False


def _is_simple(v: np.ndarray) -> bool:
    m = v.shape[0]
    for i in range(m):
        p0, p1 = v[i], v[(i + 1) % m]
        for j in range(i + 1, m):
            if j == i or (j + 1) % m == i or (i + 1) % m == j:
                continue
            if _segments_intersect(p0, p1, v[j], v[(j + 1) % m]):
                return False
    return True


def shrink_polygon(c: Contour, factor: float) -> Contour:
    """Offset every edge inward by d = factor * |area| / perimeter.

    Vertices are rebuilt from the intersections of adjacent offset lines.
    If that rebuild self-intersects, flips orientation, grows, or escapes the
    original outline, fall back to scaling the vertices toward the contour
    center by (1 - factor).  The result always has strictly smaller area.
    """
    if not 0.0 < factor < 1.0:
        raise ValueError(f"shrink factor must lie in (0, 1), got {factor}")
    area = _signed_area(c.vertices)
    if area == 0.0:
        raise DegenerateContour("zero-area contour cannot be shrunk")
    flip = area < 0.0
    v = c.vertices[::-1] if flip else np.asarray(c.vertices)
    v = _dedupe(v)
    if v.shape[0] < 3:
        raise DegenerateContour("fewer than 3 distinct vertices")

    d = factor * abs(area) / math.fsum(_edge_lengths(v))
    a, b = _edges(v)
    ev = b - a
    ln = np.hypot(ev[:, 0], ev[:, 1])
    dirs = ev / ln[:, None]
    # interior lies to the left of travel for a positive shoelace sum
    normals = np.stack([-dirs[:, 1], dirs[:, 0]], axis=1)
    anchors = a + normals * d

    m = v.shape[0]
    out = np.empty_like(v)
    for i in range(m):
        j = (i - 1) % m
        dp, dc = dirs[j], dirs[i]
        cross = dp[0] * dc[1] - dp[1] * dc[0]
        if abs(cross) < 1e-12:
            out[i] = v[i] + normals[i] * d  # collinear neighbours share the line
        else:
            w = anchors[i] - anchors[j]
            s = (w[0] * dc[1] - w[1] * dc[0]) / cross
            out[i] = anchors[j] + s * dp

    new_area = _signed_area(out)
    ok = 0.0 < new_area < abs(area) and _is_simple(out)
    if ok:
        for p in out:
            if not _point_in(v, p[0], p[1]):
                ok = False
                break
    if not ok:
        ctr = _center(v)
        out = np.array([ctr.x, ctr.y]) + (1.0 - factor) * (v - np.array([ctr.x, ctr.y]))
    if flip:
        out = out[::-1]
    return Contour(out)


# ---------------------------------------------------------------------------
# point membership and rasterization


def _point_in(v: np.ndarray, px: float, py: float) -> bool:
    inside = False
    m = v.shape[0]
    for i in range(m):
        ax, ay = v[i]
        bx, by = v[(i + 1) % m]
        if (ay <= py) != (by <= py):
            t = (py - ay) / (by - ay)
            if ax + t * (bx - ax) > px:
                inside = not inside
    return inside


def point_in_polygon(p, c: Contour) -> bool:
    """Even-odd membership; boundary points resolve by the half-open edge rule
    (a crossing counts only when it lies strictly to the right of the point)."""
    return _point_in(c.vertices, float(p[0]), float(p[1]))


def _parity_fill(v: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Even-odd membership of every grid point (xs x ys) in one pass.

    For each row, edges crossing the row are interpolated to x positions with
    the same expression as _point_in, then each crossing is bucketed against
    the ascending sample array.  A point is inside when the number of
    crossings strictly to its right is odd.  Row blocks bound the histogram
    workspace so large supersampled grids stay within a few MB.
    """
    a, b = _edges(v)
    ay = a[:, 1][None, :]
    by = b[:, 1][None, :]
    rows = ys[:, None]
    hit = (ay <= rows) != (by <= rows)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (rows - ay) / (by - ay)
        x = a[:, 0][None, :] + t * (b[:, 0][None, :] - a[:, 0][None, :])
    r_idx, e_idx = np.nonzero(hit)
    vals = x[r_idx, e_idx]
    width = xs.size
    # first sample index not left of the crossing == count of samples < x
    col = np.searchsorted(xs, vals, side="left")
    per_row = hit.sum(axis=1)
    out = np.empty((ys.size, width), dtype=bool)
    step = max(1, 2_000_000 // (width + 1))
    for r0 in range(0, ys.size, step):
        r1 = min(r0 + step, ys.size)
        lo, hi = np.searchsorted(r_idx, [r0, r1])
        hist = np.bincount(
            (r_idx[lo:hi] - r0) * (width + 1) + col[lo:hi],
            minlength=(r1 - r0) * (width + 1),
        ).reshape(r1 - r0, width + 1)
        at_most = np.cumsum(hist, axis=1)[:, :width]
        out[r0:r1] = ((per_row[r0:r1, None] - at_most) & 1) == 1
    return out


def rasterize_grid(c: Contour, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Boolean even-odd membership mask of shape (len(ys), len(xs)) for the
    cartesian grid of sample points xs x ys.  Matches point_in_polygon.
    xs must be ascending."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size > 1 and not np.all(xs[1:] > xs[:-1]):
        raise ValueError("sample columns must be strictly ascending")
    return _parity_fill(np.asarray(c.vertices), xs, np.asarray(ys, float))


def _row_intervals(
    v: np.ndarray, xs: np.ndarray, ys: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Half-open sample-index intervals of the inside samples, row by row.

    Crossings along each row pair up ascending into [enter, exit) spans; a
    sample is inside exactly when the count of crossings strictly to its
    right is odd, which is equivalent to landing in such a span.  Rows always
    carry an even crossing count because the contour is closed.
    """
    a, b = _edges(v)
    ay = a[:, 1][None, :]
    by = b[:, 1][None, :]
    rows = ys[:, None]
    hit = (ay <= rows) != (by <= rows)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (rows - ay) / (by - ay)
        x = a[:, 0][None, :] + t * (b[:, 0][None, :] - a[:, 0][None, :])
    x = np.where(hit, x, np.inf)
    x.sort(axis=1)
    if x.shape[1] % 2:
        x = np.concatenate([x, np.full((x.shape[0], 1), np.inf)], axis=1)
    idx = np.searchsorted(xs, x, side="left")
    return idx[:, 0::2], idx[:, 1::2]


def polygon_iou(a: Contour, b: Contour, supersample: int = 4) -> float:
    """Area IoU by counting supersampled cells over the joint bounding box.

    Each integer pixel of the joint box is subdivided `supersample` times per
    axis and membership is evaluated at subcell centers with even-odd fill.
    Disjoint bounding boxes short-circuit to 0.0; an empty union gives 0.0.
    """
    s = int(supersample)
    if s < 1:
        raise ValueError(f"supersample must be >= 1, got {supersample}")
    ax0, ay0, ax1, ay1 = a.bounds()
    bx0, by0, bx1, by1 = b.bounds()
    if ax1 <= bx0 or bx1 <= ax0 or ay1 <= by0 or by1 <= ay0:
        return 0.0
    x0 = math.floor(min(ax0, bx0))
    y0 = math.floor(min(ay0, by0))
    x1 = math.ceil(max(ax1, bx1))
    y1 = math.ceil(max(ay1, by1))
    w = max(int(x1 - x0), 1)
    h = max(int(y1 - y0), 1)
    xs = x0 + (np.arange(w * s) + 0.5) / s
    ys = y0 + (np.arange(h * s) + 0.5) / s
    lo_a, hi_a = _row_intervals(np.asarray(a.vertices), xs, ys)
    lo_b, hi_b = _row_intervals(np.asarray(b.vertices), xs, ys)
    count_a = int((hi_a - lo_a).sum())
    count_b = int((hi_b - lo_b).sum())
    lo = np.maximum(lo_a[:, :, None], lo_b[:, None, :])
    hi = np.minimum(hi_a[:, :, None], hi_b[:, None, :])
    inter = int(np.maximum(hi - lo, 0).sum())
    union = count_a + count_b - inter
    if union == 0:
        return 0.0
    return inter / union


# ---------------------------------------------------------------------------
# curvature proxy


def vertex_removal_delta(c: Contour, i: int) -> float:
    """Relative area change |A_before - A_after| / A_before from deleting
    vertex i.  Collinear vertices give exactly 0; sharp bends give large values."""
    v = c.vertices
    m = v.shape[0]
    if m < 4:
        raise ValueError(f"need at least 4 vertices to remove one, got {m}")
    if not 0 <= i < m:
        raise ValueError(f"vertex index {i} out of range for {m} vertices")
    before = abs(_signed_area(v))
    if before == 0.0:
        raise DegenerateContour("zero-area contour has no usable removal delta")
    after = abs(_signed_area(np.delete(v, i, axis=0)))
    return abs(before - after) / before
