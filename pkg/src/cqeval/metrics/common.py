"""Shared metric plumbing: score and parameter types, window statistics."""

from __future__ import annotations

import dataclasses
import math

import numpy as np

#: reporting order of the nine quality measures
METRIC_ORDER = ("PSNR", "SSIM", "MSSIM", "VSNR", "VIFP", "UQI", "NQM", "WSNR", "SNR")


@dataclasses.dataclass(frozen=True)
class MetricScore:
    """One metric result: identifier, scalar value, degenerate-case flag.

    ``is_infinite`` marks results that are infinite by definition (for
    example PSNR of identical images); ``value`` is then ``math.inf`` (or
    ``-math.inf`` for degenerate references) instead of a finite number.
    """

    metric: str
    value: float
    is_infinite: bool = False

    def __post_init__(self):
        if self.metric not in METRIC_ORDER:
            raise ValueError(f"unknown metric id {self.metric!r}")
        if self.is_infinite != bool(math.isinf(self.value)):
            raise ValueError("is_infinite flag must match the value")


def infinite_score(metric: str, sign: int = 1) -> MetricScore:
    return MetricScore(metric, math.copysign(math.inf, sign), True)


@dataclasses.dataclass(frozen=True)
class SsimParams:
    """Window and stabilization parameters for the structural metrics.

    ``dynamic_range`` is the maximum sample value (255 for 8-bit input);
    the stabilizers are c1 = (k1 * L)^2 and c2 = (k2 * L)^2.
    """

    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 255.0
    window: int = 8
    stride: int = 1

    def __post_init__(self):
        if self.k1 <= 0 or self.k2 <= 0 or self.dynamic_range <= 0:
            raise ValueError("k1, k2 and dynamic_range must be positive")
        if self.window < 1 or self.stride < 1:
            raise ValueError("window and stride must be at least 1")

    @property
    def c1(self) -> float:
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.dynamic_range) ** 2


@dataclasses.dataclass(frozen=True)
class HvsParams:
    """Viewing/display parameters shared by the HVS-based metrics.

    ``pixels_per_degree`` feeds the frequency grids of WSNR and the
    wavelet-domain SNR; ``nqm_viewing_angle`` is the angle (degrees)
    subtended by the image for the contrast-pyramid metric;
    ``vif_noise_variance`` is the additive-noise variance of the
    information-fidelity channel model; ``wsnr_csf`` selects the contrast
    sensitivity weighting ('mannos' or 'unit').
    """

    pixels_per_degree: float = 19.1
    nqm_viewing_angle: float = math.degrees(1.0 / 3.5)
    vif_noise_variance: float = 2.0
    wsnr_csf: str = "mannos"

    def __post_init__(self):
        if self.pixels_per_degree <= 0 or self.nqm_viewing_angle <= 0:
            raise ValueError("viewing parameters must be positive")
        if self.vif_noise_variance <= 0:
            raise ValueError("vif_noise_variance must be positive")
        if self.wsnr_csf not in ("mannos", "unit"):
            raise ValueError("wsnr_csf must be 'mannos' or 'unit'")


def check_same_shape(f: np.ndarray, g: np.ndarray) -> None:
    """Reject mismatched planes; metrics never crop silently."""
    if f.shape != g.shape:
        raise ValueError(f"dimension mismatch: {f.shape} vs {g.shape}")


def window_sums(x: np.ndarray, size: int) -> np.ndarray:
    """Sums over every size x size window (stride 1, valid positions).

    Uses a zero-padded integral image, so the cost is independent of the
    window size.
    """
    h, w = x.shape
    if h < size or w < size:
        raise ValueError(f"plane {x.shape} smaller than {size}x{size} window")
    ii = np.zeros((h + 1, w + 1), dtype=np.float64)
    np.cumsum(np.cumsum(x, axis=0), axis=1, out=ii[1:, 1:])
    return ii[size:, size:] - ii[size:, :-size] - ii[:-size, size:] + ii[:-size, :-size]


def window_moments(f: np.ndarray, g: np.ndarray, size: int):
    """Per-window means, population variances and covariance for a pair.

    Returns ``(mu_f, mu_g, var_f, var_g, cov)``; variances are clamped at
    zero to absorb integral-image roundoff.
    """
    n = float(size * size)
    mu_f = window_sums(f, size) / n
    mu_g = window_sums(g, size) / n
    var_f = np.maximum(window_sums(f * f, size) / n - mu_f * mu_f, 0.0)
    var_g = np.maximum(window_sums(g * g, size) / n - mu_g * mu_g, 0.0)
    cov = window_sums(f * g, size) / n - mu_f * mu_g
    return mu_f, mu_g, var_f, var_g, cov
