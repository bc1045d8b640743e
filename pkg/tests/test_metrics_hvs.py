"""VIFP, WSNR, NQM, and VSNR behavioral contracts."""

import math

import numpy as np
import pytest

from cqeval import (
    HvsParams,
    RasterImage,
    csf_mannos,
    nqm,
    to_luma,
    uniform_quantize,
    vifp,
    vsnr,
    wsnr,
)
from .conftest import random_image, synthetic_reference


# ------------------------------------------------------------------- VIFP


def test_vifp_identity_is_one():
    img = random_image(0, 64, 64)
    assert vifp(img, img).value == pytest.approx(1.0, abs=1e-6)


def test_vifp_monotone_in_quantization_severity():
    ref = synthetic_reference(2, size=128)
    severe = vifp(ref, uniform_quantize(ref, 4)).value
    mild = vifp(ref, uniform_quantize(ref, 256)).value
    assert severe < mild


def test_vifp_constant_images_score_one():
    a = RasterImage(np.full((64, 64, 3), 77, dtype=np.uint8))
    assert vifp(a, a).value == pytest.approx(1.0, abs=1e-12)


def test_vifp_rejects_tiny_planes():
    small = random_image(1, 12, 12)
    with pytest.raises(ValueError):
        vifp(small, small)


def test_vifp_degradation_reduces_information_ratio():
    ref = synthetic_reference(3, size=96)
    noisy = np.asarray(ref.data, dtype=np.int64)
    rng = np.random.default_rng(0)
    noisy = np.clip(noisy + rng.integers(-40, 41, size=noisy.shape), 0, 255)
    score = vifp(ref, RasterImage(noisy.astype(np.uint8))).value
    assert 0.0 < score < 1.0


# ------------------------------------------------------------------- WSNR


def test_csf_mannos_shape():
    # band-pass: rises from low frequency to a peak near 8 cpd, then decays
    lo, peak, hi = csf_mannos(np.array([0.1, 8.0, 35.0]))
    assert peak > lo and peak > hi
    assert csf_mannos(np.array([0.0]))[0] == pytest.approx(2.6 * 0.0192, abs=1e-12)


def test_wsnr_identity_is_infinite():
    img = random_image(4)
    assert wsnr(img, img).is_infinite


def test_wsnr_unit_csf_matches_spatial_snr():
    ref = random_image(5)
    dist = uniform_quantize(ref, 16)
    f, g = to_luma(ref), to_luma(dist)
    spatial = 10.0 * math.log10(float(np.sum(f * f)) / float(np.sum((f - g) ** 2)))
    unit = wsnr(ref, dist, HvsParams(wsnr_csf="unit")).value
    assert unit == pytest.approx(spatial, abs=1e-9)


def test_wsnr_monotone_in_quantization_severity():
    ref = synthetic_reference(4, size=128)
    vals = [wsnr(ref, uniform_quantize(ref, lv)).value for lv in (64, 16, 4)]
    assert vals[0] >= vals[1] >= vals[2]


# -------------------------------------------------------------------- NQM


def test_nqm_identity_is_infinite():
    img = random_image(6)
    assert nqm(img, img).is_infinite


def test_nqm_monotone_in_quantization_severity():
    ref = synthetic_reference(5, size=128)
    mild = nqm(ref, uniform_quantize(ref, 64)).value
    severe = nqm(ref, uniform_quantize(ref, 4)).value
    assert severe <= mild


def test_nqm_noise_amplitude_ordering_on_near_flat_image():
    # gentle gradient: spectrally almost flat but with nonzero band content
    ramp = np.linspace(118.0, 138.0, 64)
    plane = np.tile(ramp, (64, 1))
    rgb = np.repeat(plane[..., None], 3, axis=2).astype(np.uint8)
    ref = RasterImage(rgb)
    rng = np.random.default_rng(1)
    noise = rng.uniform(-1.0, 1.0, size=(64, 64, 1))

    def with_noise(amp):
        plus = np.clip(rgb.astype(np.float64) + amp * noise, 0, 255)
        return RasterImage(plus.astype(np.uint8))

    low = nqm(ref, with_noise(6.0)).value
    high = nqm(ref, with_noise(40.0)).value
    assert math.isfinite(low) and math.isfinite(high)
    assert high < low


# ------------------------------------------------------------------- VSNR


def test_vsnr_identity_is_infinite():
    img = random_image(8)
    assert vsnr(img, img).is_infinite


def test_vsnr_visible_quantization_is_finite_positive():
    ref = synthetic_reference(6, size=128)
    score = vsnr(ref, uniform_quantize(ref, 4))
    assert not score.is_infinite
    assert score.value > 0.0


def test_vsnr_monotone_in_quantization_severity():
    ref = synthetic_reference(7, size=128)
    vals = []
    for lv in (64, 16, 4):
        s = vsnr(ref, uniform_quantize(ref, lv))
        vals.append(math.inf if s.is_infinite else s.value)
    assert vals[0] >= vals[1] >= vals[2]


def test_vsnr_subthreshold_distortion_is_infinite():
    ref = synthetic_reference(8, size=64)
    bumped = np.asarray(ref.data, dtype=np.int64).copy()
    bumped[5, 7, 1] += 1  # one-count tweak on one sample: imperceptible
    score = vsnr(ref, RasterImage(np.clip(bumped, 0, 255).astype(np.uint8)))
    assert score.is_infinite


def test_vsnr_all_black_reference_errors():
    black = RasterImage(np.zeros((64, 64, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        vsnr(black, random_image(9))


def test_vsnr_handles_non_multiple_of_32_sizes():
    ref = synthetic_reference(9, size=100)  # padded internally
    score = vsnr(ref, uniform_quantize(ref, 8))
    assert math.isfinite(score.value)


def test_hvs_params_validation():
    with pytest.raises(ValueError):
        HvsParams(pixels_per_degree=0.0)
    with pytest.raises(ValueError):
        HvsParams(wsnr_csf="bogus")
    with pytest.raises(ValueError):
        HvsParams(vif_noise_variance=0.0)
