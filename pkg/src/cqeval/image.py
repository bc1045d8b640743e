"""Image decoding and colour-plane utilities.

All downstream quality measures consume either a decoded 8-bit RGB
:class:`RasterImage` or a double-precision single-channel plane (a plain
``(H, W)`` float64 ndarray).  Decoding normalizes every supported source
format (uncompressed BMP, 8-bit grayscale/palette/RGB PNG) to RGB so the
rest of the pipeline never branches on pixel layout.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from PIL import Image, UnidentifiedImageError

# BT.601 luma weights for R, G, B.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

_SUPPORTED_MODES = {"1", "L", "P", "RGB"}


class ImageError(Exception):
    """Base class for image decoding failures; names the offending path."""

    def __init__(self, path, message):
        self.path = str(path)
        super().__init__(f"{message}: {self.path}")


class ImageReadError(ImageError):
    """The file is missing or not readable as an image."""


class UnsupportedImageError(ImageError):
    """The image decodes but is not 8-bit grayscale/palette/RGB."""


class CorruptImageError(ImageError):
    """The image stream is damaged and cannot be fully decoded."""


@dataclasses.dataclass(frozen=True)
class RasterImage:
    """Decoded 8-bit RGB image stored as a read-only (H, W, 3) uint8 array."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError("RasterImage expects a (H, W, 3) array")
        if arr.dtype != np.uint8:
            raise ValueError("RasterImage samples must be uint8")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("RasterImage dimensions must be positive")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def size(self) -> tuple[int, int]:
        """(height, width) in pixels."""
        return self.data.shape[0], self.data.shape[1]


def load_image(path) -> RasterImage:
    """Decode a BMP or PNG file into an 8-bit RGB :class:`RasterImage`.

    Grayscale and palette sources are expanded to three channels.  Raises
    :class:`ImageReadError` for missing/unreadable files,
    :class:`UnsupportedImageError` for unsupported sample layouts and
    :class:`CorruptImageError` for damaged streams; each error message
    names the path.
    """
    try:
        img = Image.open(path)
    except FileNotFoundError:
        raise ImageReadError(path, "image file not found") from None
    except UnidentifiedImageError:
        raise ImageReadError(path, "not a decodable image") from None
    except OSError as exc:
        raise ImageReadError(path, f"cannot read image ({exc})") from None

    with img:
        if img.mode not in _SUPPORTED_MODES:
            raise UnsupportedImageError(
                path, f"unsupported image mode {img.mode!r} (need 8-bit gray/palette/RGB)"
            )
        try:
            rgb = img.convert("RGB")
            arr = np.asarray(rgb, dtype=np.uint8)
        except OSError:
            raise CorruptImageError(path, "corrupt or truncated image stream") from None
    return RasterImage(arr)


def save_png(img: RasterImage, path) -> None:
    """Write an image as an uncompressed-quality RGB PNG (lossless)."""
    Image.fromarray(np.asarray(img.data)).save(path, format="PNG")


def to_luma(img: RasterImage) -> np.ndarray:
    """BT.601 luma plane: Y = 0.299 R + 0.587 G + 0.114 B, float64 in [0, 255]."""
    data = img.data.astype(np.float64)
    wr, wg, wb = LUMA_WEIGHTS
    return wr * data[:, :, 0] + wg * data[:, :, 1] + wb * data[:, :, 2]


def channel(img: RasterImage, index: int) -> np.ndarray:
    """Return one RGB channel (0=R, 1=G, 2=B) as a float64 plane."""
    if index not in (0, 1, 2):
        raise ValueError(f"channel index must be 0, 1 or 2, got {index}")
    return img.data[:, :, index].astype(np.float64)
