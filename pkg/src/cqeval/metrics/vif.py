"""Pixel-domain visual information fidelity.

Information content is estimated over four dyadic scales from local
Gaussian-window statistics; the score is the ratio of the information that
survives the distortion channel to the information in the reference.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import convolve2d

from ..image import RasterImage, to_luma
from .common import HvsParams, MetricScore, check_same_shape

_EPS = 1e-10


def _gaussian_window(n: int) -> np.ndarray:
    """Normalized n x n Gaussian with standard deviation n/5."""
    sd = n / 5.0
    ax = np.arange(n, dtype=np.float64) - (n - 1) / 2.0
    g = np.exp(-(ax * ax) / (2.0 * sd * sd))
    w = np.outer(g, g)
    return w / w.sum()


def vifp_planes(f: np.ndarray, g: np.ndarray, h: HvsParams) -> MetricScore:
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    check_same_shape(f, g)
    sigma_n2 = h.vif_noise_variance
    num = 0.0
    den = 0.0
    for scale in range(1, 5):
        n = 2 ** (5 - scale) + 1
        win = _gaussian_window(n)
        if scale > 1:
            if min(f.shape) < n:
                raise ValueError(f"image too small for VIF scale {scale}")
            f = convolve2d(f, win, mode="valid")[::2, ::2]
            g = convolve2d(g, win, mode="valid")[::2, ::2]
        if min(f.shape) < n:
            raise ValueError(f"image too small for VIF scale {scale}")
        mu1 = convolve2d(f, win, mode="valid")
        mu2 = convolve2d(g, win, mode="valid")
        mu1_sq = mu1 * mu1
        mu2_sq = mu2 * mu2
        sigma1_sq = convolve2d(f * f, win, mode="valid") - mu1_sq
        sigma2_sq = convolve2d(g * g, win, mode="valid") - mu2_sq
        sigma12 = convolve2d(f * g, win, mode="valid") - mu1 * mu2
        sigma1_sq = np.maximum(sigma1_sq, 0.0)
        sigma2_sq = np.maximum(sigma2_sq, 0.0)

        gain = sigma12 / (sigma1_sq + _EPS)
        sv_sq = sigma2_sq - gain * sigma12

        flat1 = sigma1_sq < _EPS
        gain[flat1] = 0.0
        sv_sq[flat1] = sigma2_sq[flat1]
        sigma1_sq[flat1] = 0.0

        flat2 = sigma2_sq < _EPS
        gain[flat2] = 0.0
        sv_sq[flat2] = 0.0

        neg = gain < 0.0
        sv_sq[neg] = sigma2_sq[neg]
        gain[neg] = 0.0
        sv_sq = np.maximum(sv_sq, _EPS)

        num += float(np.sum(np.log10(1.0 + gain * gain * sigma1_sq / (sv_sq + sigma_n2))))
        den += float(np.sum(np.log10(1.0 + sigma1_sq / sigma_n2)))
    if den == 0.0:
        # constant images carry no information either way; score as perfect
        return MetricScore("VIFP", 1.0)
    return MetricScore("VIFP", num / den)


def vifp(ref: RasterImage, dist: RasterImage, h: HvsParams | None = None) -> MetricScore:
    """Visual information fidelity (pixel domain) on luma; ~1 for identical
    images, decreasing toward 0 with information loss."""
    h = h or HvsParams()
    return vifp_planes(to_luma(ref), to_luma(dist), h)
