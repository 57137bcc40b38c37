"""Image, mask, and patch-window primitives.

Images live in memory as float64 arrays of shape (H, W, C) with values in
[0, 1]; C is 1 (grayscale) or 3 (RGB). Files are 8-bit PNGs only. Decoding
maps code k to k/255; encoding rounds half-up, code = floor(v*255 + 0.5),
so every 8-bit code survives a load/save round trip unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import BoundsError, FormatError, RainweaveError

# PIL modes we accept and what they decode to. Alpha is dropped, palettes
# are expanded; everything else (1-bit, 16-bit, CMYK, ...) is rejected.
_MODE_MAP = {"L": "L", "LA": "L", "RGB": "RGB", "RGBA": "RGB", "P": "RGB"}


@dataclass
class ImageBuffer:
    """H x W x C image, float64 channel values in [0, 1], row-major."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 3:
            raise ValueError(f"image data must be HxWxC, got shape {self.data.shape}")
        h, w, c = self.data.shape
        if h < 1 or w < 1:
            raise ValueError(f"image must be at least 1x1, got {h}x{w}")
        if c not in (1, 3):
            raise ValueError(f"channel count must be 1 or 3, got {c}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("image values must be finite")
        if self.data.min() < 0.0 or self.data.max() > 1.0:
            raise ValueError("image values must lie in [0, 1]")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass
class RainMask:
    """H x W boolean map over an exemplar image; True marks rain pixels."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=bool)
        if self.data.ndim != 2:
            raise ValueError(f"mask data must be HxW, got shape {self.data.shape}")
        if self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise ValueError(f"mask must be at least 1x1, got {self.data.shape}")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def rain_pixel_count(self) -> int:
        return int(self.data.sum())


@dataclass(frozen=True)
class PatchRef:
    """Top-left corner and side length of a square patch window."""

    row: int
    col: int
    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"patch size must be >= 1, got {self.size}")
        if self.row < 0 or self.col < 0:
            raise ValueError(f"patch origin must be non-negative, got ({self.row}, {self.col})")


def _decode_png(path) -> np.ndarray:
    """Decode an 8-bit PNG to a uint8 array of shape (H, W, C), C in {1, 3}."""
    try:
        with Image.open(path) as im:
            if im.format != "PNG":
                raise FormatError(f"{path}: not a PNG file (decoded as {im.format})")
            target = _MODE_MAP.get(im.mode)
            if target is None:
                raise FormatError(
                    f"{path}: unsupported PNG color type / bit depth (mode {im.mode!r}); "
                    "need 8-bit grayscale or RGB"
                )
            im.load()  # force full decode so truncation surfaces as an error here
            arr = np.asarray(im if im.mode == target else im.convert(target), dtype=np.uint8)
    except (RainweaveError, OSError):
        raise
    except Exception as exc:  # PIL raises assorted types on corrupt streams
        raise OSError(f"{path}: cannot decode PNG: {exc}") from exc
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return arr


def load_image(path) -> ImageBuffer:
    """Load an 8-bit grayscale or RGB PNG; value = code/255. Alpha is discarded."""
    codes = _decode_png(path)
    return ImageBuffer(codes.astype(np.float64) / 255.0)


def save_image(img: ImageBuffer, path) -> None:
    """Write an 8-bit PNG; code = floor(v*255 + 0.5) (round half up)."""
    codes = np.floor(img.data * 255.0 + 0.5).astype(np.uint8)
    if img.channels == 1:
        pil = Image.fromarray(codes[:, :, 0], mode="L")
    else:
        pil = Image.fromarray(codes, mode="RGB")
    pil.save(path, format="PNG")


def load_mask(path) -> RainMask:
    """Load a rain mask PNG: a pixel is rain iff its max channel code > 127."""
    codes = _decode_png(path)
    return RainMask(codes.max(axis=2) > 127)


def check_bounds(ref: PatchRef, height: int, width: int) -> None:
    """Raise BoundsError unless the patch window fits inside height x width."""
    if ref.row + ref.size > height or ref.col + ref.size > width:
        raise BoundsError(
            f"patch (row={ref.row}, col={ref.col}, size={ref.size}) "
            f"exceeds image bounds {height}x{width}"
        )


def get_patch(img: ImageBuffer, ref: PatchRef) -> np.ndarray:
    """Copy the square window at ref out of img. Never aliases img.data."""
    check_bounds(ref, img.height, img.width)
    return img.data[ref.row : ref.row + ref.size, ref.col : ref.col + ref.size].copy()
