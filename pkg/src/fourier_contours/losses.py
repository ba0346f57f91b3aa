"""Training losses.

The total objective is L = L_cls + lambda * L_reg with L_cls = L_tr + L_tcr
(cross-entropies over the text region and text center region maps, the text
region one under online hard example mining) and

    L_reg = (1 / N') * sum_{i in TR} sum_n w_i * [ sl1(dx_in) + sl1(dy_in) ]

where the reconstruction of the ground-truth and predicted signatures of
pixel i is compared point by point at N' parameters, per axis, with
smooth-L1; w_i is 1.0 for pixels inside the text center region and 0.5
otherwise.  Note the normalization: by N' only, not by the pixel count, so
values from differently sized regions are comparable only per pixel count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AlignmentMismatch, NonFinite
from .fourier import evaluate_series, flat_to_coeffs

__all__ = [
    "LossBreakdown",
    "smooth_l1",
    "cross_entropy",
    "regression_loss",
    "regression_loss_grad",
    "ohem_select",
    "total_loss",
    "CLAMP_EPS",
    "OHEM_RATIO",
    "OHEM_ZERO_POS_FLOOR",
]

CLAMP_EPS = 1e-7
OHEM_RATIO = 3
OHEM_ZERO_POS_FLOOR = 100


@dataclass(frozen=True)
class LossBreakdown:
    l_tr: float
    l_tcr: float
    l_reg: float
    lam: float
    total: float


def smooth_l1(x, beta: float = 1.0):
    """0.5 x^2 / beta for |x| < beta, else |x| - 0.5 beta.  Elementwise."""
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    ax = np.abs(np.asarray(x, dtype=np.float64))
    out = np.where(ax < beta, 0.5 * ax * ax / beta, ax - 0.5 * beta)
    return out if out.ndim else float(out)


def _smooth_l1_grad(x, beta: float):
    ax = np.abs(x)
    return np.where(ax < beta, x / beta, np.sign(x))


def cross_entropy(prob, label, eps: float = CLAMP_EPS):
    """Binary cross-entropy with probability clamping to [eps, 1 - eps].
    Elementwise; labels are 0/1."""
    p = np.clip(np.asarray(prob, dtype=np.float64), eps, 1.0 - eps)
    y = np.asarray(label, dtype=np.float64)
    out = -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))
    return out if out.ndim else float(out)


def _check_pairs(gt_flat, pred_flat, in_tcr):
    gt = np.asarray(gt_flat, dtype=np.float64)
    pr = np.asarray(pred_flat, dtype=np.float64)
    member = np.asarray(in_tcr, dtype=bool)
    if gt.ndim != 2 or pr.shape != gt.shape:
        raise AlignmentMismatch(
            f"gt {gt.shape} and pred {pr.shape} must be equal (M, C) arrays"
        )
    if member.shape != (gt.shape[0],):
        raise AlignmentMismatch(
            f"membership length {member.shape} must match pixel count {gt.shape[0]}"
        )
    return gt, pr, member


def regression_loss(
    gt_flat, pred_flat, in_tcr, n_points: int = 50, beta: float = 1.0
) -> float:
    """Signature regression loss over the text-region pixels supplied.

    Each row of gt_flat / pred_flat is one pixel's flat recentered signature.
    Returns the w-weighted smooth-L1 sum over reconstructed point differences
    on both axes, divided by n_points.
    """
    gt, pr, member = _check_pairs(gt_flat, pred_flat, in_tcr)
    if gt.shape[0] == 0:
        return 0.0
    zg = evaluate_series(flat_to_coeffs(gt), n_points)
    zp = evaluate_series(flat_to_coeffs(pr), n_points)
    per_point = smooth_l1(zp.real - zg.real, beta) + smooth_l1(zp.imag - zg.imag, beta)
    weights = np.where(member, 1.0, 0.5)
    return float(np.sum(weights * per_point.sum(axis=1)) / n_points)


def regression_loss_grad(
    gt_flat, pred_flat, in_tcr, n_points: int = 50, beta: float = 1.0
) -> np.ndarray:
    """Analytic gradient of regression_loss with respect to pred_flat."""
    gt, pr, member = _check_pairs(gt_flat, pred_flat, in_tcr)
    if gt.shape[0] == 0:
        return np.zeros_like(pr)
    deg = (gt.shape[1] // 2 - 1) // 2
    zg = evaluate_series(flat_to_coeffs(gt), n_points)
    zp = evaluate_series(flat_to_coeffs(pr), n_points)
    gx = _smooth_l1_grad(zp.real - zg.real, beta)  # (M, n)
    gy = _smooth_l1_grad(zp.imag - zg.imag, beta)
    t = np.arange(n_points) / n_points
    theta = 2.0 * np.pi * np.outer(np.arange(-deg, deg + 1), t)  # (2K + 1, n)
    cos, sin = np.cos(theta), np.sin(theta)
    # point (x, y) at parameter n responds to coefficient k as
    #   dx/du_k = cos, dx/dv_k = -sin, dy/du_k = sin, dy/dv_k = cos
    gu = (gx[:, None, :] * cos[None] + gy[:, None, :] * sin[None]).sum(axis=2)
    gv = (-gx[:, None, :] * sin[None] + gy[:, None, :] * cos[None]).sum(axis=2)
    weights = np.where(member, 1.0, 0.5)[:, None]
    out = np.empty_like(pr)
    out[:, 0::2] = gu * weights / n_points
    out[:, 1::2] = gv * weights / n_points
    return out


def ohem_select(losses, positive, ratio: int = OHEM_RATIO) -> np.ndarray:
    """Hard-example selection mask over per-pixel classification losses.

    Keeps every positive pixel plus the min(ratio * positives, negatives)
    negatives with the largest loss; equal losses prefer the lower index.
    With zero positives, keeps the min(negatives, 100) hardest negatives.
    """
    if ratio < 1:
        raise ValueError(f"ratio must be >= 1, got {ratio}")
    loss = np.asarray(losses, dtype=np.float64)
    pos = np.asarray(positive, dtype=bool)
    if loss.shape != pos.shape or loss.ndim != 1:
        raise AlignmentMismatch(
            f"losses {loss.shape} and positive {pos.shape} must be equal 1-d arrays"
        )
    selected = pos.copy()
    neg_idx = np.nonzero(~pos)[0]
    n_pos = int(pos.sum())
    budget = ratio * n_pos if n_pos else OHEM_ZERO_POS_FLOOR
    budget = min(budget, neg_idx.size)
    if budget > 0:
        # stable sort on negated loss: ties resolve to the lower linear index
        order = np.argsort(-loss[neg_idx], kind="stable")
        selected[neg_idx[order[:budget]]] = True
    return selected


def total_loss(l_tr: float, l_tcr: float, l_reg: float, lam: float = 1.0) -> LossBreakdown:
    parts = {"l_tr": l_tr, "l_tcr": l_tcr, "l_reg": l_reg, "lambda": lam}
    for name, value in parts.items():
        if not np.isfinite(value):
            raise NonFinite(f"{name} must be finite, got {value}")
        if name != "lambda" and value < 0.0:
            raise ValueError(f"{name} must be >= 0, got {value}")
    return LossBreakdown(
        l_tr=float(l_tr),
        l_tcr=float(l_tcr),
        l_reg=float(l_reg),
        lam=float(lam),
        total=float(l_tr + l_tcr + lam * l_reg),
    )
