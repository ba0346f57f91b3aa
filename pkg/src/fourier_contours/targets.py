"""Ground-truth map generation for multi-scale dense prediction.

Each pyramid level owns a cell grid at its stride; cell (row i, col j) looks
at the image point ((j + 0.5) * stride, (i + 0.5) * stride).  An instance is
assigned to every level whose scale range contains its relative size
(longest bounding-box side divided by the longest image side; range ends are
inclusive, so ranges deliberately overlap).

Per assigned level an instance paints:

* tr:     text region, cells whose center lies inside the polygon
* tcr:    text center region, cells inside the inward-shrunk polygon
* regression: the flat Fourier signature, recentered to each cell center
  (only the c_0 channels differ between cells of one instance)
* weight: 1.0 on tcr, 0.5 on tr outside tcr, 0.0 elsewhere
* care:   0 marks do-not-care cells (ignored instances) excluded from
  classification losses; the four maps above cannot encode that distinction

When instances overlap on a cell the smaller-area instance wins.  Geometry
failures (degenerate polygons) skip that instance and are recorded; an image
is never aborted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .annotations import AnnotatedImage, TextInstance
from .errors import GeometryError
from .fourier import embed
from .geometry import rasterize_grid, shrink_polygon, signed_area

__all__ = ["LevelSpec", "LevelTargets", "TargetMaps", "assign_levels", "generate_targets",
           "DEFAULT_LEVELS", "DEFAULT_SHRINK"]

DEFAULT_SHRINK = 0.3


@dataclass(frozen=True)
class LevelSpec:
    """One pyramid level: name, stride in pixels, inclusive scale range."""

    name: str
    stride: int
    low: float
    high: float

    def __post_init__(self) -> None:
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if not 0.0 <= self.low < self.high <= 1.0:
            raise ValueError(
                f"scale range must satisfy 0 <= low < high <= 1, got [{self.low}, {self.high}]"
            )


DEFAULT_LEVELS = (
    LevelSpec("P3", 8, 0.0, 0.4),
    LevelSpec("P4", 16, 0.3, 0.7),
    LevelSpec("P5", 32, 0.6, 1.0),
)


@dataclass
class LevelTargets:
    spec: LevelSpec
    tr: np.ndarray          # (H, W) uint8
    tcr: np.ndarray         # (H, W) uint8
    regression: np.ndarray  # (2 * (2K + 1), H, W) float64
    weight: np.ndarray      # (H, W) float64, values in {0.0, 0.5, 1.0}
    care: np.ndarray        # (H, W) uint8, 0 = excluded from classification

    @property
    def shape(self) -> tuple[int, int]:
        return self.tr.shape


@dataclass
class TargetMaps:
    image_id: str
    width: int
    height: int
    k: int
    levels: dict[str, LevelTargets]
    skipped: list[tuple[str, str]] = field(default_factory=list)


def instance_scale(polygon: Contour, width: int, height: int) -> float:
    """Longest bounding-box side over the longest image side."""
    x0, y0, x1, y1 = polygon.bounds()
    return max(x1 - x0, y1 - y0) / max(width, height)


def assign_levels(scale: float, specs=DEFAULT_LEVELS) -> list[LevelSpec]:
    """Levels whose inclusive scale range contains the value.  Overlapping
    ranges deliberately assign border scales to both neighbours."""
    return [spec for spec in specs if spec.low <= scale <= spec.high]


def _grid(spec: LevelSpec, width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    w = math.ceil(width / spec.stride)
    h = math.ceil(height / spec.stride)
    xs = (np.arange(w) + 0.5) * spec.stride
    ys = (np.arange(h) + 0.5) * spec.stride
    return xs, ys


def generate_targets(
    img: AnnotatedImage,
    specs=DEFAULT_LEVELS,
    k: int = 5,
    n: int = 400,
    shrink_factor: float = DEFAULT_SHRINK,
) -> TargetMaps:
    channels = 2 * (2 * k + 1)
    levels: dict[str, LevelTargets] = {}
    grids: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    ignore_masks: dict[str, np.ndarray] = {}
    for spec in specs:
        xs, ys = _grid(spec, img.width, img.height)
        shape = (ys.size, xs.size)
        levels[spec.name] = LevelTargets(
            spec=spec,
            tr=np.zeros(shape, dtype=np.uint8),
            tcr=np.zeros(shape, dtype=np.uint8),
            regression=np.zeros((channels,) + shape, dtype=np.float64),
            weight=np.zeros(shape, dtype=np.float64),
            care=np.ones(shape, dtype=np.uint8),
        )
        grids[spec.name] = (xs, ys)
        ignore_masks[spec.name] = np.zeros(shape, dtype=bool)

    out = TargetMaps(img.image_id, img.width, img.height, k, levels)

    for inst in img.instances:
        if not inst.ignore:
            continue
        scale = instance_scale(inst.polygon, img.width, img.height)
        for spec in assign_levels(scale, specs):
            xs, ys = grids[spec.name]
            ignore_masks[spec.name] |= rasterize_grid(inst.polygon, xs, ys)

    # big instances first, so smaller ones overwrite shared cells and win
    valid = [inst for inst in img.instances if not inst.ignore]
    order = sorted(valid, key=lambda inst: -abs(signed_area(inst.polygon)))
    for inst in order:
        try:
            signature = embed(inst.polygon, k=k, n=n)
            shrunk = shrink_polygon(inst.polygon, shrink_factor)
        except GeometryError as exc:
            out.skipped.append((inst.id, str(exc)))
            continue
        base = signature.flat
        scale = instance_scale(inst.polygon, img.width, img.height)
        for spec_a in assign_levels(scale, specs):
            xs, ys = grids[spec_a.name]
            lt = levels[spec_a.name]
            inside = rasterize_grid(inst.polygon, xs, ys)
            if not inside.any():
                continue
            center = rasterize_grid(shrunk, xs, ys) & inside
            lt.tr[inside] = 1
            lt.tcr[inside] = center[inside].astype(np.uint8)
            lt.weight[inside] = np.where(center[inside], 1.0, 0.5)
            lt.regression[:, inside] = base[:, None]
            iy, ix = np.nonzero(inside)
            lt.regression[2 * k, iy, ix] -= xs[ix]      # u_0 channel
            lt.regression[2 * k + 1, iy, ix] -= ys[iy]  # v_0 channel
    for spec in specs:
        lt = levels[spec.name]
        lt.care = (~(ignore_masks[spec.name] & (lt.tr == 0))).astype(np.uint8)
        lt.weight[lt.tr == 0] = 0.0
    return out
