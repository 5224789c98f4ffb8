"""Image representation and PNG I/O.

Images are carried as immutable float64 arrays in [0, 1], interleaved
row-major with shape (height, width, channels). PNG is the only file
format: 8- or 16-bit grayscale/RGB in (alpha stripped), 8-bit out.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import cv2
import numpy as np

from .errors import ImageError, PngFormatError

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"

# BT.601 full-range luma coefficients. The Y-channel convention is not
# standardized across scoring scripts; PSNR-Y/SSIM-Y values shift if a
# limited-range or BT.709 variant is used instead.
LUMA_R = 0.299
LUMA_G = 0.587
LUMA_B = 0.114


def _freeze(data: np.ndarray) -> np.ndarray:
    data = np.ascontiguousarray(data, dtype=np.float64)
    data.setflags(write=False)
    return data


@dataclass(frozen=True)
class ImageBuffer:
    """Planar RGB or grayscale image, samples in [0, 1].

    `data` has shape (height, width, channels) with channels 1 or 3.
    Instances are immutable (the underlying array is read-only) and safe
    to share between threads.
    """

    data: np.ndarray

    def __post_init__(self):
        data = self.data
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3 or data.shape[2] not in (1, 3):
            raise ImageError(f"expected (H, W, 1|3) samples, got shape {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise ImageError(f"empty image: shape {data.shape}")
        data = _freeze(data)
        if not np.all(np.isfinite(data)):
            raise ImageError("image contains non-finite samples")
        if data.min() < 0.0 or data.max() > 1.0:
            raise ImageError(
                f"samples outside [0, 1]: min={data.min()}, max={data.max()}"
            )
        object.__setattr__(self, "data", data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class LumaPlane:
    """Single-channel luma image, samples in [0, 1], shape (height, width)."""

    data: np.ndarray

    def __post_init__(self):
        data = self.data
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise ImageError(f"expected non-empty (H, W) samples, got shape {data.shape}")
        data = _freeze(data)
        if not np.all(np.isfinite(data)):
            raise ImageError("luma plane contains non-finite samples")
        if data.min() < 0.0 or data.max() > 1.0:
            raise ImageError(
                f"samples outside [0, 1]: min={data.min()}, max={data.max()}"
            )
        object.__setattr__(self, "data", data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


def load_png(path: str | os.PathLike) -> ImageBuffer:
    """Load an 8- or 16-bit grayscale/RGB PNG, dequantized to [0, 1].

    Alpha channels are stripped. Palette PNGs are rejected rather than
    expanded. Raises PngFormatError with a distinct message for a missing
    file, wrong magic, or unsupported color type.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise PngFormatError(f"no such file: {path}")
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:8] != PNG_MAGIC:
        raise PngFormatError(f"not a PNG file (bad magic): {path}")
    # IHDR is the first chunk: color type sits at byte 25.
    if len(raw) < 26:
        raise PngFormatError(f"truncated PNG header: {path}")
    color_type = raw[25]
    if color_type == 3:
        raise PngFormatError(f"unsupported color type (palette) in {path}")
    decoded = cv2.imdecode(np.frombuffer(raw, np.uint8), cv2.IMREAD_UNCHANGED)
    if decoded is None:
        raise PngFormatError(f"PNG decode failed: {path}")
    if decoded.dtype == np.uint8:
        scale = 255.0
    elif decoded.dtype == np.uint16:
        scale = 65535.0
    else:
        raise PngFormatError(f"unsupported PNG sample type {decoded.dtype}: {path}")
    if color_type in (0, 4):
        # grayscale (possibly + alpha, which cv2 expands to BGRA): 1 channel out
        if decoded.ndim == 3:
            decoded = decoded[:, :, 0]
    elif color_type in (2, 6):
        if decoded.ndim != 3 or decoded.shape[2] not in (3, 4):
            raise PngFormatError(f"unexpected decoded shape {decoded.shape}: {path}")
        decoded = decoded[:, :, 2::-1]  # strip alpha, BGR -> RGB
    else:
        raise PngFormatError(f"unsupported color type {color_type}: {path}")
    return ImageBuffer(decoded.astype(np.float64) / scale)


def quantize_u8(data: np.ndarray) -> np.ndarray:
    """Map [0, 1] floats to uint8 by round-to-nearest, ties away from zero."""
    return np.floor(np.asarray(data, dtype=np.float64) * 255.0 + 0.5).astype(np.uint8)


def save_png(img: ImageBuffer, path: str | os.PathLike) -> None:
    """Write an 8-bit PNG; save/load round-trips to within 1/510 per sample."""
    path = os.fspath(path)
    q = quantize_u8(img.data)
    if img.channels == 3:
        q = q[:, :, ::-1]  # cv2 writes BGR
    else:
        q = q[:, :, 0]
    ok = cv2.imwrite(path, q)
    if not ok:
        raise ImageError(f"cannot write PNG: {path}")


def crop_to_multiple(img: ImageBuffer, multiple: int = 8) -> ImageBuffer:
    """Crop to the largest top-left rectangle whose sides are multiples of `multiple`.

    No resampling: the right and bottom remainders are discarded.
    """
    if multiple < 1:
        raise ImageError(f"multiple must be positive, got {multiple}")
    if img.width < multiple or img.height < multiple:
        raise ImageError(
            f"image {img.width}x{img.height} smaller than multiple {multiple}"
        )
    new_w = (img.width // multiple) * multiple
    new_h = (img.height // multiple) * multiple
    if new_w == img.width and new_h == img.height:
        return img
    return ImageBuffer(img.data[:new_h, :new_w, :])


def rgb_to_luma(img: ImageBuffer) -> LumaPlane:
    """BT.601 full-range luma: Y = 0.299 R + 0.587 G + 0.114 B."""
    if img.channels != 3:
        raise ImageError(f"luma conversion needs 3 channels, got {img.channels}")
    d = img.data
    y = LUMA_R * d[:, :, 0] + LUMA_G * d[:, :, 1] + LUMA_B * d[:, :, 2]
    # Coefficients sum to 1 only up to float rounding; keep the invariant.
    return LumaPlane(np.clip(y, 0.0, 1.0))
