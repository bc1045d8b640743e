"""Noise-quality measure built on a cosine-log contrast pyramid.

The degraded image is modelled as the reference after linear frequency
distortion plus additive noise.  Both images are split into octave bands,
converted to local band-limited contrast, gated by contrast-detection
thresholds, masked where the contrast difference is imperceptible, and the
SNR of the reconstructed band sums is reported.
"""

from __future__ import annotations

import math

import numpy as np

from ..image import RasterImage, to_luma
from .common import HvsParams, MetricScore, check_same_shape, infinite_score

#: number of bandpass octaves in the pyramid
BANDS = 5


def contrast_threshold(f_cpd: float) -> float:
    """Detection threshold (contrast) at a given spatial frequency."""
    return 1.0 / (520.0 * (0.0192 + 0.114 * f_cpd) * math.exp(-((0.114 * f_cpd) ** 1.1)))


def _radius_grid(shape: tuple[int, int]) -> np.ndarray:
    """Radial frequency in cycles/image, centered (fftshift layout)."""
    rows, cols = shape
    ry = np.arange(rows, dtype=np.float64) - rows // 2
    rx = np.arange(cols, dtype=np.float64) - cols // 2
    return np.hypot(ry[:, None], rx[None, :])


def _pyramid_filters(w: np.ndarray) -> list[np.ndarray]:
    """Lowpass plus five cosine-log octave filters over radius ``w``."""
    filters = []
    with np.errstate(divide="ignore", invalid="ignore"):
        low = 0.5 * (1.0 + np.cos(np.pi * np.log2(w + 2.0) - np.pi))
        filters.append(np.where(w + 2.0 <= 4.0, low, 0.0))
        for k in range(1, BANDS + 1):
            inside = (w >= 2.0 ** (k - 1)) & (w <= 2.0 ** (k + 1))
            safe = np.where(w > 0.0, w, 1.0)
            band = 0.5 * (1.0 + np.cos(np.pi * np.log2(safe) - np.pi * k))
            filters.append(np.where(inside, band, 0.0))
    return filters


def _band_images(plane: np.ndarray, filters: list[np.ndarray]) -> list[np.ndarray]:
    spectrum = np.fft.fftshift(np.fft.fft2(plane))
    return [np.real(np.fft.ifft2(np.fft.ifftshift(spectrum * g))) for g in filters]


def _contrasts(bands: list[np.ndarray]) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Band-limited contrast c_k = a_k / (lowpass + lower bands)."""
    contrasts = []
    denoms = []
    denom = bands[0].copy()
    for k in range(1, BANDS + 1):
        with np.errstate(divide="ignore", invalid="ignore"):
            c = bands[k] / denom
        c[~np.isfinite(c)] = 0.0
        contrasts.append(c)
        denoms.append(denom.copy())
        denom = denom + bands[k]
    return contrasts, denoms


def nqm_planes(f: np.ndarray, g: np.ndarray, h: HvsParams) -> MetricScore:
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    check_same_shape(f, g)
    filters = _pyramid_filters(_radius_grid(f.shape))
    ref_bands = _band_images(f, filters)
    dist_bands = _band_images(g, filters)
    c_ref, den_ref = _contrasts(ref_bands)
    c_dist, den_dist = _contrasts(dist_bands)

    y1 = np.zeros_like(f)
    y2 = np.zeros_like(f)
    for k in range(BANDS):
        # detection threshold for the band centered at 2^(k+1) cycles/image
        d = contrast_threshold(2.0 ** (k + 1) / h.nqm_viewing_angle)
        c = c_ref[k]
        ci = np.clip(c_dist[k], -1.0, 1.0)
        # mask imperceptible contrast differences back to the reference
        t = d * (0.86 * (np.abs(c) / d - 1.0) + 0.3)
        ci = np.where(np.abs(ci - c) < t, c, ci)
        # drop content below the detection threshold, then rebuild amplitudes
        y1 += np.where(np.abs(c) < d, 0.0, c * den_ref[k])
        y2 += np.where(np.abs(ci) < d, 0.0, ci * den_dist[k])

    noise = float(np.sum((y1 - y2) ** 2))
    signal = float(np.sum(y1 * y1))
    if noise == 0.0:
        return infinite_score("NQM")
    if signal == 0.0:
        return infinite_score("NQM", sign=-1)
    return MetricScore("NQM", 10.0 * math.log10(signal / noise))


def nqm(ref: RasterImage, dist: RasterImage, h: HvsParams | None = None) -> MetricScore:
    """Noise-quality measure on luma; infinite for an exactly-zero residual."""
    h = h or HvsParams()
    return nqm_planes(to_luma(ref), to_luma(dist), h)
