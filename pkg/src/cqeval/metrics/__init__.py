"""The nine full-reference quality measures and their batch driver."""

from __future__ import annotations

import math

import numpy as np

from ..image import RasterImage, channel, to_luma
from .basic import mse, psnr, psnr_planes, snr, snr_planes
from .common import (
    METRIC_ORDER,
    HvsParams,
    MetricScore,
    SsimParams,
    check_same_shape,
    infinite_score,
)
from .nqm import nqm, nqm_planes
from .ssim import (
    mssim,
    mssim_planes,
    ms_ssim,
    ms_ssim_planes,
    ssim_components,
    ssim_components_planes,
    ssim_map,
    ssim_map_planes,
    uqi,
    uqi_planes,
)
from .vif import vifp, vifp_planes
from .vsnr import vsnr, vsnr_planes
from .wsnr import csf_mannos, wsnr, wsnr_planes

__all__ = [
    "METRIC_ORDER",
    "HvsParams",
    "MetricError",
    "MetricScore",
    "SsimParams",
    "csf_mannos",
    "evaluate_all",
    "mse",
    "mssim",
    "ms_ssim",
    "nqm",
    "psnr",
    "snr",
    "ssim_components",
    "ssim_map",
    "uqi",
    "vifp",
    "vsnr",
    "wsnr",
]


class MetricError(ValueError):
    """A metric failed on a specific pair; carries the metric id."""

    def __init__(self, metric: str, message: str):
        self.metric = metric
        super().__init__(f"{metric}: {message}")


_DISPATCH = {
    "PSNR": lambda f, g, sp, hp: psnr_planes(f, g),
    "SSIM": lambda f, g, sp, hp: mssim_planes(f, g, sp),
    "MSSIM": lambda f, g, sp, hp: ms_ssim_planes(f, g, sp),
    "VSNR": lambda f, g, sp, hp: vsnr_planes(f, g, hp),
    "VIFP": lambda f, g, sp, hp: vifp_planes(f, g, hp),
    "UQI": lambda f, g, sp, hp: uqi_planes(f, g, sp.window),
    "NQM": lambda f, g, sp, hp: nqm_planes(f, g, hp),
    "WSNR": lambda f, g, sp, hp: wsnr_planes(f, g, hp),
    "SNR": lambda f, g, sp, hp: snr_planes(f, g),
}


def evaluate_all(
    ref: RasterImage,
    dist: RasterImage,
    ssim_params: SsimParams | None = None,
    hvs_params: HvsParams | None = None,
    per_channel: bool = False,
) -> list[MetricScore]:
    """All nine scores for one pair, in reporting order.

    By default every metric runs on the luma plane.  With ``per_channel``
    each metric is evaluated on the R, G and B planes independently and the
    three values are averaged.  Errors from individual metrics are re-raised
    as :class:`MetricError` naming the failing metric.
    """
    if ref.size != dist.size:
        raise ValueError(f"dimension mismatch: {ref.size} vs {dist.size}")
    sp = ssim_params or SsimParams()
    hp = hvs_params or HvsParams()
    if per_channel:
        planes = [(channel(ref, i), channel(dist, i)) for i in range(3)]
    else:
        planes = [(to_luma(ref), to_luma(dist))]
    scores = []
    for metric in METRIC_ORDER:
        fn = _DISPATCH[metric]
        try:
            partials = [fn(f, g, sp, hp) for f, g in planes]
        except MetricError:
            raise
        except ValueError as exc:
            raise MetricError(metric, str(exc)) from exc
        if len(partials) == 1:
            scores.append(partials[0])
        else:
            value = float(np.mean([p.value for p in partials]))
            if math.isnan(value):
                raise MetricError(metric, "channels disagree in degenerate direction")
            scores.append(MetricScore(metric, value, math.isinf(value)))
    return scores
