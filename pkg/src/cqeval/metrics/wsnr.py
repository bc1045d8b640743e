"""Contrast-sensitivity-weighted SNR in the frequency domain."""

from __future__ import annotations

import math

import numpy as np

from ..image import RasterImage, to_luma
from .common import HvsParams, MetricScore, check_same_shape, infinite_score


def csf_mannos(f_cpd: np.ndarray) -> np.ndarray:
    """Exponential contrast sensitivity model over cycles/degree."""
    f = np.asarray(f_cpd, dtype=np.float64)
    return 2.6 * (0.0192 + 0.114 * f) * np.exp(-((0.114 * f) ** 1.1))


def _csf_grid(shape: tuple[int, int], h: HvsParams) -> np.ndarray:
    """CSF weights over the 2-D FFT frequency grid of a plane."""
    rows, cols = shape
    fy = np.fft.fftfreq(rows) * h.pixels_per_degree
    fx = np.fft.fftfreq(cols) * h.pixels_per_degree
    radial = np.hypot(fy[:, None], fx[None, :])
    if h.wsnr_csf == "unit":
        return np.ones_like(radial)
    return csf_mannos(radial)


def wsnr_planes(f: np.ndarray, g: np.ndarray, h: HvsParams) -> MetricScore:
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    check_same_shape(f, g)
    x = np.fft.fft2(f)
    y = np.fft.fft2(g)
    c = _csf_grid(f.shape, h)
    num = float(np.sum(np.abs(x * c) ** 2))
    den = float(np.sum(np.abs((x - y) * c) ** 2))
    if den == 0.0:
        return infinite_score("WSNR")
    if num == 0.0:
        return infinite_score("WSNR", sign=-1)
    return MetricScore("WSNR", 10.0 * math.log10(num / den))


def wsnr(ref: RasterImage, dist: RasterImage, h: HvsParams | None = None) -> MetricScore:
    """Weighted SNR: spectra of luma weighted by the CSF over a radial
    cycles/degree grid (whole-plane FFT, no padding); infinite for
    identical images."""
    h = h or HvsParams()
    return wsnr_planes(to_luma(ref), to_luma(dist), h)
