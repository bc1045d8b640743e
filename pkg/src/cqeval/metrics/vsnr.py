"""Wavelet-domain visual SNR with a two-stage visibility model.

Stage 1 decomposes the luminance error over a 5-level 9/7 wavelet pyramid
and compares each octave's RMS contrast against a contrast-sensitivity
threshold; distortion below threshold in every band scores infinite.
Stage 2 combines the total perceived error contrast with the distance from
an ideal (threshold-shaped) contrast profile and reports the result in dB
against the reference's own RMS contrast.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.ndimage import correlate1d

from ..image import RasterImage, to_luma
from .common import HvsParams, MetricScore, check_same_shape, infinite_score
from .wsnr import csf_mannos

#: decomposition depth; images are padded to a multiple of 2**LEVELS
LEVELS = 5

#: weight of the perceived-contrast term against global precedence
ALPHA = 0.04

#: display model: max luminance (cd/m^2), gamma, black-level offset
L_MAX = 100.0
GAMMA = 2.2
BLACK_OFFSET = 0.0

#: contrast threshold at the sensitivity peak (a sensitive observer)
PEAK_THRESHOLD = 0.001

# 9/7 analysis filter bank, scaled to a near-orthonormal convention so
# per-level coefficient energies stay commensurate with the pixel domain.
_SQRT2 = math.sqrt(2.0)
DEC_LO = _SQRT2 * np.array(
    [
        0.026748757410810,
        -0.016864118442875,
        -0.078223266528988,
        0.266864118442875,
        0.602949018236358,
        0.266864118442875,
        -0.078223266528988,
        -0.016864118442875,
        0.026748757410810,
    ]
)
DEC_HI = (1.0 / _SQRT2) * np.array(
    [
        0.091271763114250,
        -0.057543526228500,
        -0.591271763114250,
        1.115087052456994,
        -0.591271763114250,
        -0.057543526228500,
        0.091271763114250,
    ]
)

_peak_grid = np.linspace(0.01, 40.0, 100001)
#: peak value of the sensitivity model, for normalizing thresholds
CSF_PEAK = float(csf_mannos(_peak_grid).max())
del _peak_grid


def dwt97(x: np.ndarray, levels: int = LEVELS):
    """Separable 9/7 wavelet decomposition with mirrored boundaries.

    Returns a list of ``(lh, hl, hh)`` detail triples, finest scale first,
    plus the final approximation band.
    """
    ll = np.asarray(x, dtype=np.float64)
    details = []
    for _ in range(levels):
        lo_r = correlate1d(ll, DEC_LO, axis=0, mode="mirror")[::2, :]
        hi_r = correlate1d(ll, DEC_HI, axis=0, mode="mirror")[::2, :]
        lh = correlate1d(lo_r, DEC_HI, axis=1, mode="mirror")[:, ::2]
        hl = correlate1d(hi_r, DEC_LO, axis=1, mode="mirror")[:, ::2]
        hh = correlate1d(hi_r, DEC_HI, axis=1, mode="mirror")[:, ::2]
        ll = correlate1d(lo_r, DEC_LO, axis=1, mode="mirror")[:, ::2]
        details.append((lh, hl, hh))
    return details, ll


def _pad_to_multiple(x: np.ndarray, multiple: int) -> np.ndarray:
    ph = -x.shape[0] % multiple
    pw = -x.shape[1] % multiple
    if ph == 0 and pw == 0:
        return x
    return np.pad(x, ((ph // 2, ph - ph // 2), (pw // 2, pw - pw // 2)), mode="symmetric")


def _to_luminance(v: np.ndarray) -> np.ndarray:
    k = L_MAX ** (1.0 / GAMMA) / 255.0
    return (BLACK_OFFSET + k * v) ** GAMMA


def band_thresholds(h: HvsParams) -> np.ndarray:
    """Contrast-detection threshold per octave band, finest scale first."""
    freqs = h.pixels_per_degree * 2.0 ** -np.arange(1, LEVELS + 1, dtype=np.float64)
    return PEAK_THRESHOLD * CSF_PEAK / csf_mannos(freqs)


def vsnr_planes(f: np.ndarray, g: np.ndarray, h: HvsParams) -> MetricScore:
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    check_same_shape(f, g)
    f = _pad_to_multiple(f, 2**LEVELS)
    g = _pad_to_multiple(g, 2**LEVELS)
    lum_ref = _to_luminance(f)
    err = _to_luminance(g) - lum_ref
    mean_lum = float(lum_ref.mean())
    if mean_lum == 0.0:
        raise ValueError("VSNR undefined for an all-black reference")

    details, _ = dwt97(err, LEVELS)
    npix = err.size
    band_contrast = np.array(
        [
            math.sqrt(sum(float(np.sum(d * d)) for d in triple) / npix) / mean_lum
            for triple in details
        ]
    )
    thresholds = band_thresholds(h)
    if not np.any(band_contrast > thresholds):
        return infinite_score("VSNR")

    total_contrast = float(err.std()) / mean_lum
    d_pc = total_contrast
    # ideal profile: total error contrast distributed along the threshold shape
    scale = total_contrast / math.sqrt(float(np.sum(thresholds**2)))
    d_gp = float(np.linalg.norm(band_contrast - scale * thresholds))
    vd = ALPHA * d_pc + (1.0 - ALPHA) * d_gp / _SQRT2
    if vd == 0.0:
        return infinite_score("VSNR")
    ref_contrast = float(lum_ref.std()) / mean_lum
    if ref_contrast == 0.0:
        return infinite_score("VSNR", sign=-1)
    return MetricScore("VSNR", 10.0 * math.log10(ref_contrast**2 / vd**2))


def vsnr(ref: RasterImage, dist: RasterImage, h: HvsParams | None = None) -> MetricScore:
    """Visual SNR on luma; infinite when the distortion is below the
    wavelet-band visibility thresholds (including identical images)."""
    h = h or HvsParams()
    return vsnr_planes(to_luma(ref), to_luma(dist), h)
