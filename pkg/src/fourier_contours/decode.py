"""Turning dense prediction maps back into text contours.

Per level: the detection score of a cell is the product of its text-region
and text-center-region probabilities.  Cells at or above the score threshold
contribute a candidate contour, reconstructed from the cell's regression
vector after adding the cell center back onto c_0.  Candidates from all
levels are pooled and reduced by greedy polygon non-maximum suppression.

Everything is ordered: cells are visited row-major, levels in their declared
order, and all ties break toward the earlier origin, so output is the same
byte-for-byte on every run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ChannelCountMismatch, ShapeMismatch
from .fourier import evaluate_series, flat_to_coeffs
from .geometry import Contour, polygon_iou

__all__ = [
    "LevelPrediction",
    "PredictionMaps",
    "Detection",
    "score_map",
    "decode_level",
    "poly_nms",
    "decode_all",
    "DEFAULT_SCORE_THRESH",
    "DEFAULT_NMS_IOU",
]

DEFAULT_SCORE_THRESH = 0.3
DEFAULT_NMS_IOU = 0.1


@dataclass(frozen=True)
class LevelPrediction:
    """Predicted maps of one pyramid level."""

    name: str
    stride: int
    tr_prob: np.ndarray     # (H, W) in [0, 1]
    tcr_prob: np.ndarray    # (H, W) in [0, 1]
    regression: np.ndarray  # (2 * (2K + 1), H, W)

    def __post_init__(self) -> None:
        tr = np.asarray(self.tr_prob, dtype=np.float64)
        tcr = np.asarray(self.tcr_prob, dtype=np.float64)
        reg = np.asarray(self.regression, dtype=np.float64)
        if tr.ndim != 2 or tr.shape != tcr.shape:
            raise ShapeMismatch(
                f"tr {tr.shape} and tcr {tcr.shape} must be equal 2-d shapes"
            )
        if reg.ndim != 3 or reg.shape[1:] != tr.shape:
            raise ShapeMismatch(
                f"regression {reg.shape} must be (C, {tr.shape[0]}, {tr.shape[1]})"
            )
        c = reg.shape[0]
        if c % 2 or (c // 2) % 2 == 0:
            raise ChannelCountMismatch(
                f"regression needs 2 * (2K + 1) channels, got {c}"
            )
        for label, arr in (("tr", tr), ("tcr", tcr)):
            if not np.isfinite(arr).all() or arr.min() < 0.0 or arr.max() > 1.0:
                raise ValueError(f"{label} probabilities must lie in [0, 1]")
        if not np.isfinite(reg).all():
            raise ValueError("regression channels must be finite")
        object.__setattr__(self, "tr_prob", tr)
        object.__setattr__(self, "tcr_prob", tcr)
        object.__setattr__(self, "regression", reg)

    @property
    def degree(self) -> int:
        return (self.regression.shape[0] // 2 - 1) // 2


@dataclass
class PredictionMaps:
    image_id: str
    width: int
    height: int
    levels: dict[str, LevelPrediction] = field(default_factory=dict)


@dataclass(frozen=True)
class Detection:
    contour: Contour
    score: float
    level: str = ""
    # (level rank, row-major cell index): the deterministic tie-break key
    origin: tuple[int, int] = (0, 0)


def score_map(tr_prob: np.ndarray, tcr_prob: np.ndarray) -> np.ndarray:
    """Cell detection scores: elementwise product of the two probabilities."""
    tr = np.asarray(tr_prob, dtype=np.float64)
    tcr = np.asarray(tcr_prob, dtype=np.float64)
    if tr.shape != tcr.shape:
        raise ShapeMismatch(f"shape mismatch: {tr.shape} vs {tcr.shape}")
    return tr * tcr


def decode_level(
    pred: LevelPrediction,
    score_thresh: float = DEFAULT_SCORE_THRESH,
    n_points: int = 50,
    level_rank: int = 0,
) -> list[Detection]:
    """Candidate contours of one level, in row-major cell order."""
    if not 0.0 < score_thresh < 1.0:
        raise ValueError(f"score threshold must lie in (0, 1), got {score_thresh}")
    scores = score_map(pred.tr_prob, pred.tcr_prob)
    iy, ix = np.nonzero(scores >= score_thresh)  # np.nonzero is row-major
    if iy.size == 0:
        return []
    flat = pred.regression[:, iy, ix].T  # (M, C)
    coeffs = flat_to_coeffs(flat)
    deg = pred.degree
    coeffs[:, deg] += (ix + 0.5) * pred.stride + 1j * (iy + 0.5) * pred.stride
    pts = evaluate_series(coeffs, n_points)  # (M, n_points) complex
    width = pred.tr_prob.shape[1]
    out = []
    for row in range(iy.size):
        contour = Contour(np.stack([pts[row].real, pts[row].imag], axis=1))
        cell = int(iy[row]) * width + int(ix[row])
        out.append(
            Detection(
                contour=contour,
                score=float(scores[iy[row], ix[row]]),
                level=pred.name,
                origin=(level_rank, cell),
            )
        )
    return out


def poly_nms(
    detections,
    iou_thresh: float = DEFAULT_NMS_IOU,
    supersample: int = 4,
) -> list[Detection]:
    """Greedy polygon NMS.

    Candidates are visited by descending score, ties broken by earlier
    origin; one is kept iff its IoU with every already-kept contour is
    strictly below the threshold.
    """
    if not 0.0 < iou_thresh < 1.0:
        raise ValueError(f"NMS IoU threshold must lie in (0, 1), got {iou_thresh}")
    ordered = sorted(detections, key=lambda d: (-d.score, d.origin))
    kept: list[Detection] = []
    for cand in ordered:
        if all(
            polygon_iou(cand.contour, k.contour, supersample) < iou_thresh
            for k in kept
        ):
            kept.append(cand)
    return kept


def decode_all(
    maps: PredictionMaps,
    score_thresh: float = DEFAULT_SCORE_THRESH,
    nms_iou: float = DEFAULT_NMS_IOU,
    n_points: int = 50,
    supersample: int = 4,
) -> list[Detection]:
    """Decode every level, then suppress across the pooled candidate list, so
    the same instance seen at two strides yields a single detection."""
    candidates: list[Detection] = []
    for rank, pred in enumerate(maps.levels.values()):
        candidates.extend(
            decode_level(pred, score_thresh=score_thresh, n_points=n_points, level_rank=rank)
        )
    return poly_nms(candidates, iou_thresh=nms_iou, supersample=supersample)
