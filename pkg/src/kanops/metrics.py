"""Image-quality scoring: MSE, PSNR, and global single-window SSIM.

The SSIM here is the one-window variant computed from whole-image moments::

    SSIM(A, B) = (2 mu_A mu_B + d1) (2 sigma_AB + d2)
                 -----------------------------------------
                 (mu_A^2 + mu_B^2 + d1) (sigma_A^2 + sigma_B^2 + d2)

with ``d1 = (0.01 L)^2``, ``d2 = (0.03 L)^2`` and population (divide-by-N)
variances, matching the MSE normalization.  It deliberately differs from the
common 11x11 sliding-window SSIM of image libraries.

All functions accept either :class:`~kanops.imaging.Image` instances or bare
2-D arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError

__all__ = ["QualityReport", "mse", "psnr", "ssim_global", "quality_report"]


def _pixels(x) -> np.ndarray:
    arr = getattr(x, "pixels", x)
    return np.asarray(arr, dtype=np.float64)


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    pa, pb = _pixels(a), _pixels(b)
    if pa.shape != pb.shape:
        raise ArgumentError(
            f"images have different dimensions: {pa.shape} vs {pb.shape}"
        )
    return pa, pb


@dataclass(frozen=True)
class QualityReport:
    """One row of quality metrics for an image pair.

    Attributes
    ----------
    mse : float
        Mean squared error.
    psnr_db : float
        Peak signal-to-noise ratio in dB; ``+inf`` when ``mse == 0``.
    ssim : float
        Global structural similarity in ``[-1, 1]``.
    """

    mse: float
    psnr_db: float
    ssim: float


def mse(a, b) -> float:
    """Mean squared pixel difference.

    Parameters
    ----------
    a, b : Image or numpy.ndarray
        Equal-dimension images.

    Returns
    -------
    float
    """
    pa, pb = _pair(a, b)
    return float(np.mean((pa - pb) ** 2))


def psnr(a, b, max_value: float = 1.0) -> float:
    """Peak signal-to-noise ratio ``10 log10(max_value^2 / MSE)`` in dB.

    Parameters
    ----------
    a, b : Image or numpy.ndarray
    max_value : float
        Peak representable value (default 1.0 for normalized images).

    Returns
    -------
    float
        ``+inf`` when the images are identical (``MSE == 0``).
    """
    max_value = float(max_value)
    if not (math.isfinite(max_value) and max_value > 0):
        raise ArgumentError(f"max_value must be > 0, got {max_value!r}")
    err = mse(a, b)
    if err == 0.0:
        return math.inf
    return float(10.0 * np.log10(max_value**2 / err))


def ssim_global(a, b, L: float = 1.0) -> float:
    """Global one-window structural similarity of two images.

    Parameters
    ----------
    a, b : Image or numpy.ndarray
    L : float
        Dynamic range of the pixel values; sets the stabilizers
        ``d1 = (0.01 L)^2`` and ``d2 = (0.03 L)^2``.

    Returns
    -------
    float
        Symmetric in ``(a, b)``; exactly 1 for identical images.
    """
    L = float(L)
    if not (math.isfinite(L) and L > 0):
        raise ArgumentError(f"L must be > 0, got {L!r}")
    pa, pb = _pair(a, b)
    d1 = (0.01 * L) ** 2
    d2 = (0.03 * L) ** 2
    mu_a = float(pa.mean())
    mu_b = float(pb.mean())
    var_a = float(((pa - mu_a) ** 2).mean())
    var_b = float(((pb - mu_b) ** 2).mean())
    cov = float(((pa - mu_a) * (pb - mu_b)).mean())
    return (
        (2.0 * mu_a * mu_b + d1)
        * (2.0 * cov + d2)
        / ((mu_a**2 + mu_b**2 + d1) * (var_a + var_b + d2))
    )


def quality_report(a, b, max_value: float = 1.0, L: float | None = None):
    """Bundle :func:`mse`, :func:`psnr`, and :func:`ssim_global` in one call.

    Parameters
    ----------
    a, b : Image or numpy.ndarray
    max_value : float
        Peak value for the PSNR (default 1.0).
    L : float, optional
        SSIM dynamic range; defaults to ``max_value``.

    Returns
    -------
    QualityReport
    """
    return QualityReport(
        mse=mse(a, b),
        psnr_db=psnr(a, b, max_value),
        ssim=ssim_global(a, b, max_value if L is None else L),
    )
