"""Shared fixtures and builders for the cqeval test suite."""

from __future__ import annotations

import csv

import numpy as np
import pytest
from PIL import Image

from cqeval import RasterImage, save_png, uniform_quantize

#: TID level -> quantization levels used when building real distorted files
TID_LEVEL_TO_COLORS = {1: 64, 2: 32, 3: 16, 4: 8, 5: 4}

#: ``acceptance criterion N: PASS/FAIL/SKIPPED`` lines recorded while running
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo acceptance-criterion verdicts after the run, outside capture."""
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    last = None
    for line in ACCEPTANCE_LINES:
        if line != last:
            terminalreporter.write_line(line)
        last = line


def random_image(seed: int, h: int = 64, w: int = 64) -> RasterImage:
    rng = np.random.default_rng(seed)
    return RasterImage(rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8))


def synthetic_reference(seed: int, size: int = 256) -> RasterImage:
    """Smooth gradients plus seeded texture, full dynamic range."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size]
    base = (
        96.0
        + 80.0 * np.sin(2.0 * np.pi * xx / (40 + 7 * seed))
        + 60.0 * np.cos(2.0 * np.pi * yy / (56 + 5 * seed))
    )
    texture = rng.normal(0.0, 18.0, size=(size, size))
    plane = np.clip(base + texture, 0.0, 255.0)
    rgb = np.stack(
        [plane, np.roll(plane, 3, axis=0), np.roll(plane, 5, axis=1)], axis=-1
    )
    return RasterImage(rgb.astype(np.uint8))


def gradient_image(h: int = 64, w: int = 64) -> RasterImage:
    """Horizontal 0..255 ramp replicated over RGB."""
    ramp = np.linspace(0.0, 255.0, w)
    plane = np.tile(ramp, (h, 1))
    rgb = np.stack([plane] * 3, axis=-1)
    return RasterImage(np.clip(np.floor(rgb + 0.5), 0, 255).astype(np.uint8))


def write_manifest(path, rows, header=("name", "mos")) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(header))
        writer.writerows(rows)


def _save_bmp(img: RasterImage, path) -> None:
    Image.fromarray(np.asarray(img.data)).save(path, format="BMP")


def make_tid_tree(root, refs=25, types=24, levels=5, mos=None, real_types=()):
    """Conformant TID-style layout with a manifest.

    Files are empty placeholders (the loader never decodes them), except for
    distortion types in ``real_types``, which get real 48x48 images so the
    tree can feed the scoring pipeline; references are then real too.
    """
    root.mkdir(parents=True, exist_ok=True)
    rows = []
    ref_imgs = {}
    for r in range(1, refs + 1):
        path = root / f"i{r:02d}.bmp"
        if real_types:
            ref_imgs[r] = synthetic_reference(r, size=48)
            _save_bmp(ref_imgs[r], path)
        else:
            path.write_bytes(b"")
    for r in range(1, refs + 1):
        for t in range(1, types + 1):
            for lv in range(1, levels + 1):
                name = f"i{r:02d}_{t:02d}_{lv}.bmp"
                if t in real_types:
                    _save_bmp(
                        uniform_quantize(ref_imgs[r], TID_LEVEL_TO_COLORS[lv]),
                        root / name,
                    )
                else:
                    (root / name).write_bytes(b"")
                value = mos(r, t, lv) if mos else ((r + t + lv) % 9) + 0.1
                rows.append((name, f"{value:.4f}"))
    write_manifest(root / "mos.csv", rows)
    return root


def make_cqd_tree(root, refs=25, methods=("KMeans", "MedianCut", "Octree", "Wu", "SOM"),
                  levels=(4, 8, 16, 32, 64, 128, 256), mos=None, real=False):
    """Conformant CQD-style layout with a manifest.

    With ``real`` the tree holds real 48x48 images (references and uniform
    quantizations) so the scoring pipeline can decode it.
    """
    root.mkdir(parents=True, exist_ok=True)
    rows = []
    ref_imgs = {}
    for r in range(1, refs + 1):
        path = root / f"{r}.png"
        if real:
            ref_imgs[r] = synthetic_reference(r + 100, size=48)
            save_png(ref_imgs[r], path)
        else:
            path.write_bytes(b"")
    for meth in methods:
        sub = root / meth
        sub.mkdir(exist_ok=True)
        for r in range(1, refs + 1):
            for n in levels:
                name = f"{n}colors_{r}.png"
                if real:
                    save_png(uniform_quantize(ref_imgs[r], n), sub / name)
                else:
                    (sub / name).write_bytes(b"")
                value = mos(meth, r, n) if mos else min(99.0, n / 3.0 + r)
                rows.append((f"{meth}/{name}", f"{value:.4f}"))
    write_manifest(root / "mos.csv", rows)
    return root


@pytest.fixture
def refs_dir(tmp_path):
    """Directory of five small pristine reference PNGs."""
    d = tmp_path / "refs"
    d.mkdir()
    for i in range(5):
        save_png(synthetic_reference(i, size=96), d / f"ref_{i}.png")
    return d
