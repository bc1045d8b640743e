"""Colour-quantization degradations used to build test fixtures.

Two degradation families are provided: plain per-channel uniform
quantization, and palette quantization (median cut) followed by
Floyd-Steinberg error diffusion.  Both are deterministic so fixture
generation is exactly reproducible.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .image import RasterImage

_KINDS = ("quantize", "dither")


@dataclasses.dataclass(frozen=True)
class DistortionSpec:
    """One degradation: kind ('quantize' or 'dither'), level count, RNG seed.

    ``levels`` is the number of per-channel quantization levels for
    'quantize' and the palette size for 'dither'.  The seed is recorded for
    provenance; the current algorithms have no stochastic steps.
    """

    kind: str
    levels: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if not 2 <= self.levels <= 256:
            raise ValueError(f"levels must be in [2, 256], got {self.levels}")


def apply_spec(img: RasterImage, spec: DistortionSpec) -> RasterImage:
    """Apply a :class:`DistortionSpec` to an image."""
    if spec.kind == "quantize":
        return uniform_quantize(img, spec.levels)
    return palette_dither(img, spec.levels, spec.seed)


def uniform_quantize(img: RasterImage, levels: int) -> RasterImage:
    """Quantize each RGB channel to ``levels`` uniformly spaced values.

    Sample ``v`` maps to ``round(floor(v * levels / 256) * 255 / (levels - 1))``
    clamped to [0, 255]; rounding is half-up.  ``levels == 256`` reproduces the
    input exactly.
    """
    if not 2 <= levels <= 256:
        raise ValueError(f"levels must be in [2, 256], got {levels}")
    v = img.data.astype(np.int64)
    bins = (v * levels) // 256
    recon = np.floor(bins * (255.0 / (levels - 1)) + 0.5)
    out = np.clip(recon, 0, 255).astype(np.uint8)
    return RasterImage(out)


def _median_cut_palette(pixels: np.ndarray, colors: int) -> np.ndarray:
    """Median-cut palette of at most ``colors`` RGB entries.

    Boxes are repeatedly split on the channel with the largest value range,
    at the population median snapped to the nearest run boundary (pixels
    sharing the split-channel value always stay in one box, so an image with
    at most ``colors`` distinct colours gets its exact colours back), until
    the requested count is reached or no box holds more than one distinct
    colour.  Fully deterministic.
    """
    boxes = [pixels.astype(np.int64)]
    while len(boxes) < colors:
        ranges = [
            int(np.ptp(box, axis=0).max()) if len(box) > 1 else 0 for box in boxes
        ]
        widest = int(np.argmax(ranges))
        if ranges[widest] == 0:
            break
        box = boxes[widest]
        chan = int(np.ptp(box, axis=0).argmax())
        order = np.argsort(box[:, chan], kind="stable")
        vals = box[order, chan]
        cuts = np.flatnonzero(np.diff(vals) != 0) + 1
        cut = int(cuts[np.argmin(np.abs(cuts - len(box) // 2))])
        boxes[widest : widest + 1] = [box[order[:cut]], box[order[cut:]]]
    pal = np.array([np.floor(box.mean(axis=0) + 0.5) for box in boxes])
    return np.clip(pal, 0, 255).astype(np.float64)


def palette_dither(img: RasterImage, colors: int, seed: int = 0) -> RasterImage:
    """Reduce to a median-cut palette with Floyd-Steinberg error diffusion.

    The scan is plain raster order (left-to-right, top-to-bottom) and the
    accumulated value at each pixel is clamped to [0, 255] before the
    nearest palette colour is chosen, so diffusion cannot push samples out
    of range.  ``seed`` is accepted for provenance but the procedure is
    deterministic.  The output uses at most ``colors`` distinct colours.
    """
    if not 2 <= colors <= 256:
        raise ValueError(f"colors must be in [2, 256], got {colors}")
    del seed  # recorded upstream; no stochastic step here
    h, w = img.size
    palette = _median_cut_palette(img.data.reshape(-1, 3), colors)
    buf = img.data.astype(np.float64)
    out = np.empty((h, w, 3), dtype=np.uint8)
    for y in range(h):
        for x in range(w):
            v = np.clip(buf[y, x], 0.0, 255.0)
            diff = palette - v
            k = int(np.argmin(np.einsum("ij,ij->i", diff, diff)))
            out[y, x] = palette[k]
            err = v - palette[k]
            if x + 1 < w:
                buf[y, x + 1] += err * (7.0 / 16.0)
            if y + 1 < h:
                if x > 0:
                    buf[y + 1, x - 1] += err * (3.0 / 16.0)
                buf[y + 1, x] += err * (5.0 / 16.0)
                if x + 1 < w:
                    buf[y + 1, x + 1] += err * (1.0 / 16.0)
    return RasterImage(out)


def count_colors(img: RasterImage) -> int:
    """Number of distinct (R, G, B) triples in the image."""
    return len(np.unique(img.data.reshape(-1, 3), axis=0))
