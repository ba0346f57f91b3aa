"""Fourier signatures of closed contours.

A closed contour is treated as a periodic complex function f(t) = x(t) + i y(t)
with f(t) = f(t + 1).  From n equidistant samples z_j = f(j / n) the complex
coefficient of harmonic k is

    c_k = (1 / n) * sum_j z_j * exp(-2 pi i k j / n)

computed by direct summation in a fixed order, never via an FFT, so results
are bit-identical across runs and thread counts.  The degree-K signature keeps
k in [-K, K]; c_0 is the contour center, and the flat real layout interleaves
real and imaginary parts from k = -K upward:

    [u_-K, v_-K, ..., u_0, v_0, ..., u_K, v_K]      length 2 * (2K + 1)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChannelCountMismatch, DegreeTooLarge, NonFinite
from .geometry import Contour, ResampledContour, resample_equidistant

__all__ = [
    "FourierSignature",
    "fourier_coefficients",
    "embed",
    "reconstruct",
    "recenter",
    "truncation_l2_error",
    "flat_to_coeffs",
    "coeffs_to_flat",
    "evaluate_series",
    "DEFAULT_DEGREE",
    "DEFAULT_SAMPLES",
    "DEFAULT_RECON_POINTS",
]

DEFAULT_DEGREE = 5
DEFAULT_SAMPLES = 400
DEFAULT_RECON_POINTS = 50


@dataclass(frozen=True)
class FourierSignature:
    """Complex coefficients c_-K .. c_K of one contour.  coeffs[j] holds the
    harmonic k = j - K; the center sits at coeffs[K]."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.coeffs, dtype=np.complex128, copy=True)
        if arr.ndim != 1 or arr.size % 2 == 0:
            raise ChannelCountMismatch(
                f"signature needs an odd number of coefficients, got shape {arr.shape}"
            )
        if not np.isfinite(arr).all():
            raise NonFinite("signature coefficients must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def degree(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def c0(self) -> complex:
        return complex(self.coeffs[self.degree])

    @property
    def flat(self) -> np.ndarray:
        return coeffs_to_flat(self.coeffs)

    @classmethod
    def from_flat(cls, flat) -> "FourierSignature":
        return cls(flat_to_coeffs(flat))


def flat_to_coeffs(flat) -> np.ndarray:
    """Interleaved real layout -> complex coefficients (last axis 2K + 1)."""
    arr = np.asarray(flat, dtype=np.float64)
    m = arr.shape[-1]
    if m % 2 or (m // 2) % 2 == 0:
        raise ChannelCountMismatch(
            f"flat signature length must be 2 * (2K + 1), got {m}"
        )
    return arr[..., 0::2] + 1j * arr[..., 1::2]


def coeffs_to_flat(coeffs) -> np.ndarray:
    arr = np.asarray(coeffs, dtype=np.complex128)
    out = np.empty(arr.shape[:-1] + (2 * arr.shape[-1],), dtype=np.float64)
    out[..., 0::2] = arr.real
    out[..., 1::2] = arr.imag
    return out


def _sample_array(points) -> np.ndarray:
    if isinstance(points, ResampledContour):
        return points.points
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected (n, 2) samples, got shape {arr.shape}")
    return arr


def fourier_coefficients(points, k: int) -> FourierSignature:
    """Degree-k signature of equidistant samples by direct summation.

    Requires 2k + 1 <= n so every kept harmonic is a distinct DFT residue.
    """
    pts = _sample_array(points)
    n = pts.shape[0]
    if k < 0:
        raise ValueError(f"degree must be >= 0, got {k}")
    if 2 * k + 1 > n:
        raise DegreeTooLarge(f"degree {k} needs 2k + 1 <= {n} samples")
    z = pts[:, 0] + 1j * pts[:, 1]
    t = np.arange(n) / n
    ks = np.arange(-k, k + 1)
    basis = np.exp(-2j * np.pi * np.outer(ks, t))
    coeffs = (basis * z).sum(axis=1) / n
    return FourierSignature(coeffs)


def embed(c: Contour, k: int = DEFAULT_DEGREE, n: int = DEFAULT_SAMPLES) -> FourierSignature:
    """Resample the contour to n equidistant points and take its degree-k
    signature.  The resampling fixes start point, direction, and speed, so
    congruent contours with different vertex lists embed identically."""
    return fourier_coefficients(resample_equidistant(c, n), k)


def evaluate_series(coeffs, n_points: int) -> np.ndarray:
    """Evaluate sum_k c_k exp(2 pi i k t) at t = j / n_points, j = 0 .. n_points - 1.

    coeffs may be batched: shape (..., 2K + 1) gives output (..., n_points).
    """
    arr = np.asarray(coeffs, dtype=np.complex128)
    if arr.shape[-1] % 2 == 0:
        raise ChannelCountMismatch(
            f"coefficient axis must have odd length, got {arr.shape[-1]}"
        )
    deg = (arr.shape[-1] - 1) // 2
    t = np.arange(n_points) / n_points
    ks = np.arange(-deg, deg + 1)
    basis = np.exp(2j * np.pi * np.outer(t, ks))  # (n_points, 2K + 1)
    return (arr[..., None, :] * basis).sum(axis=-1)


def reconstruct(s: FourierSignature, n_points: int = DEFAULT_RECON_POINTS) -> Contour:
    """Evaluate the truncated series at n_points equidistant parameters."""
    if n_points < 3:
        raise ValueError(f"need n_points >= 3, got {n_points}")
    z = evaluate_series(s.coeffs, n_points)
    return Contour(np.stack([z.real, z.imag], axis=1))


def recenter(s: FourierSignature, origin) -> FourierSignature:
    """Shift the coordinate origin to `origin`: only c_0 changes, by exactly
    -(origin.x + i origin.y)."""
    shift = complex(float(origin[0]), float(origin[1]))
    coeffs = np.array(s.coeffs, copy=True)
    coeffs[s.degree] -= shift
    return FourierSignature(coeffs)


def truncation_l2_error(points, k: int) -> float:
    """Mean squared point error of the degree-k reconstruction at the sample
    parameters.

    Computed two ways that must agree to 1e-9 relative: directly, and as the
    Parseval tail sum of |c_j|^2 over the discarded DFT residues.  The tail
    form is returned; it is accumulated over residues ordered by descending
    |frequency|, so the value is exactly non-increasing in k.
    """
    pts = _sample_array(points)
    n = pts.shape[0]
    if 2 * k + 1 > n:
        raise DegreeTooLarge(f"degree {k} needs 2k + 1 <= {n} samples")
    z = pts[:, 0] + 1j * pts[:, 1]
    t = np.arange(n) / n
    residues = np.arange(n)
    basis = np.exp(-2j * np.pi * np.outer(residues, t))
    coeffs = (basis * z).sum(axis=1) / n
    signed = np.where(residues <= n // 2, residues, residues - n)

    # tail over |frequency| > k, accumulated from the highest frequency down;
    # larger k only truncates this prefix sum, hence exact monotonicity
    order = np.lexsort((-signed, -np.abs(signed)))
    power = np.abs(coeffs[order]) ** 2
    running = np.cumsum(power)
    discarded = int(np.count_nonzero(np.abs(signed) > k))
    tail = float(running[discarded - 1]) if discarded else 0.0

    kept = np.abs(signed) <= k
    recon = (np.conj(basis[kept]).T * coeffs[kept]).sum(axis=1)
    direct = float(np.mean(np.abs(z - recon) ** 2))

    scale = float(np.mean(np.abs(z) ** 2))
    if abs(direct - tail) > 1e-9 * max(direct, tail) + 1e-14 * max(scale, 1.0):
        raise ArithmeticError(
            f"Parseval check failed: direct {direct!r} vs tail {tail!r}"
        )
    return tail
