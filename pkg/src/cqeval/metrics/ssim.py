"""Structural similarity family: windowed SSIM, its mean, the multi-scale
variant, and the universal quality index.

All of these slide a uniform 8x8 window one pixel at a time (the window the
underlying similarity model was defined with) over the luma plane and
aggregate per-window statistics.
"""

from __future__ import annotations

import numpy as np

from ..image import RasterImage, to_luma
from .common import MetricScore, SsimParams, check_same_shape, window_moments

#: per-scale exponents of the multi-scale similarity score
MS_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)

#: stabilizer for otherwise-undefined quality-index windows
UQI_EPS = 1e-12


def ssim_components_planes(f: np.ndarray, g: np.ndarray, p: SsimParams):
    """Luminance, contrast and structure comparison maps (one value/window)."""
    check_same_shape(f, g)
    mu_f, mu_g, var_f, var_g, cov = window_moments(f, g, p.window)
    c1, c2 = p.c1, p.c2
    c3 = c2 / 2.0
    sd_f = np.sqrt(var_f)
    sd_g = np.sqrt(var_g)
    lum = (2.0 * mu_f * mu_g + c1) / (mu_f * mu_f + mu_g * mu_g + c1)
    con = (2.0 * sd_f * sd_g + c2) / (var_f + var_g + c2)
    struct = (cov + c3) / (sd_f * sd_g + c3)
    return lum, con, struct


def ssim_map_planes(f: np.ndarray, g: np.ndarray, p: SsimParams) -> np.ndarray:
    """Similarity value per window position, in [-1, 1]."""
    check_same_shape(f, g)
    mu_f, mu_g, var_f, var_g, cov = window_moments(f, g, p.window)
    c1, c2 = p.c1, p.c2
    num = (2.0 * mu_f * mu_g + c1) * (2.0 * cov + c2)
    den = (mu_f * mu_f + mu_g * mu_g + c1) * (var_f + var_g + c2)
    return num / den


def ssim_map(ref: RasterImage, dist: RasterImage, p: SsimParams | None = None) -> np.ndarray:
    """Sliding-window similarity map on luma."""
    p = p or SsimParams()
    return ssim_map_planes(to_luma(ref), to_luma(dist), p)


def ssim_components(ref: RasterImage, dist: RasterImage, p: SsimParams | None = None):
    """(luminance, contrast, structure) maps on luma; their product is the map."""
    p = p or SsimParams()
    return ssim_components_planes(to_luma(ref), to_luma(dist), p)


def mssim_planes(f: np.ndarray, g: np.ndarray, p: SsimParams) -> MetricScore:
    return MetricScore("SSIM", float(np.mean(ssim_map_planes(f, g, p))))


def mssim(ref: RasterImage, dist: RasterImage, p: SsimParams | None = None) -> MetricScore:
    """Mean of the sliding-window similarity map (the reported SSIM score)."""
    p = p or SsimParams()
    return mssim_planes(to_luma(ref), to_luma(dist), p)


def _downsample2(x: np.ndarray) -> np.ndarray:
    """2x2 mean pooling, truncating an odd trailing row/column."""
    h, w = x.shape
    x = x[: h - h % 2, : w - w % 2]
    return 0.25 * (x[0::2, 0::2] + x[1::2, 0::2] + x[0::2, 1::2] + x[1::2, 1::2])


def ms_ssim_planes(f: np.ndarray, g: np.ndarray, p: SsimParams) -> MetricScore:
    check_same_shape(f, g)
    min_side = min(f.shape)
    if min_side < p.window:
        raise ValueError(f"plane {f.shape} smaller than {p.window}x{p.window} window")
    # as many dyadic scales as keep the window inside the image, at most 5
    scales = min(len(MS_WEIGHTS), int(np.log2(min_side / p.window)) + 1)
    weights = np.asarray(MS_WEIGHTS[:scales]) / sum(MS_WEIGHTS[:scales])
    value = 1.0
    for s in range(scales):
        if s:
            f = _downsample2(f)
            g = _downsample2(g)
        lum, con, struct = ssim_components_planes(f, g, p)
        if s < scales - 1:
            term = max(float(np.mean(con * struct)), 0.0)
        else:
            term = max(float(np.mean(lum * con * struct)), 0.0)
        value *= term ** weights[s]
    return MetricScore("MSSIM", float(value))


def ms_ssim(ref: RasterImage, dist: RasterImage, p: SsimParams | None = None) -> MetricScore:
    """Multi-scale similarity: contrast/structure pooled over a dyadic
    pyramid (up to five scales), luminance folded in at the coarsest."""
    p = p or SsimParams()
    return ms_ssim_planes(to_luma(ref), to_luma(dist), p)


def uqi_planes(f: np.ndarray, g: np.ndarray, window: int = 8) -> MetricScore:
    check_same_shape(f, g)
    mu_f, mu_g, var_f, var_g, cov = window_moments(f, g, window)
    num = 4.0 * cov * mu_f * mu_g
    den = (var_f + var_g) * (mu_f * mu_f + mu_g * mu_g)
    # stabilized fallback for windows where the plain quotient is undefined
    stab_num = (2.0 * mu_f * mu_g + UQI_EPS) * (2.0 * cov + UQI_EPS)
    stab_den = (mu_f * mu_f + mu_g * mu_g + UQI_EPS) * (var_f + var_g + UQI_EPS)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), stab_num / stab_den)
    return MetricScore("UQI", float(np.mean(q)))


def uqi(ref: RasterImage, dist: RasterImage, window: int = 8) -> MetricScore:
    """Universal quality index: correlation x luminance x contrast per
    window, averaged.  Constant windows fall back to a stabilized form that
    scores 1 for identical content."""
    return uqi_planes(to_luma(ref), to_luma(dist), window)
