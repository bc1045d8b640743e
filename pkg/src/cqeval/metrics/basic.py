"""Pointwise error metrics: MSE, PSNR, SNR."""

from __future__ import annotations

import math

import numpy as np

from ..image import RasterImage, to_luma
from .common import MetricScore, check_same_shape, infinite_score

#: peak sample value for 8-bit images
PEAK = 255.0


def mse(f: np.ndarray, g: np.ndarray) -> float:
    """Mean squared error between two planes."""
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    check_same_shape(f, g)
    diff = f - g
    return float(np.mean(diff * diff))


def psnr_planes(f: np.ndarray, g: np.ndarray) -> MetricScore:
    """PSNR (dB) of two planes against the 8-bit peak value."""
    err = mse(f, g)
    if err == 0.0:
        return infinite_score("PSNR")
    return MetricScore("PSNR", 20.0 * math.log10(PEAK / math.sqrt(err)))


def snr_planes(f: np.ndarray, g: np.ndarray) -> MetricScore:
    """SNR (dB): reference power over error power."""
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    check_same_shape(f, g)
    p_signal = float(np.mean(f * f))
    if p_signal == 0.0:
        raise ValueError("SNR undefined for an all-zero reference")
    p_noise = mse(f, g)
    if p_noise == 0.0:
        return infinite_score("SNR")
    return MetricScore("SNR", 10.0 * math.log10(p_signal / p_noise))


def psnr(ref: RasterImage, dist: RasterImage) -> MetricScore:
    """Peak signal-to-noise ratio on the luma plane; infinite when identical."""
    return psnr_planes(to_luma(ref), to_luma(dist))


def snr(ref: RasterImage, dist: RasterImage) -> MetricScore:
    """Signal-to-noise ratio on the luma plane; infinite when identical."""
    return snr_planes(to_luma(ref), to_luma(dist))
