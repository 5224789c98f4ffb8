"""Overlap-based tiled inference around any restorer.

Tiles are laid on a grid with stride tile - overlap; the final row and
column are shifted inward so the restorer only ever sees real content.
Restored tiles are blended back by a weight-normalized sum, with either
uniform weights or a separable linear feather over the overlap band.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TilingError
from .geometry import Restorer
from .image import ImageBuffer

BLEND_MODES = ("uniform_average", "linear_feather")


@dataclass(frozen=True)
class TileConfig:
    tile: int = 512
    overlap: int = 32
    blend: str = "linear_feather"

    def __post_init__(self):
        if self.tile < 8 or self.tile % 8 != 0:
            raise TilingError(f"tile must be a positive multiple of 8, got {self.tile}")
        if not 0 <= self.overlap < self.tile / 2:
            raise TilingError(
                f"overlap must satisfy 0 <= overlap < tile/2, got {self.overlap} "
                f"for tile {self.tile}"
            )
        if self.blend not in BLEND_MODES:
            raise TilingError(f"blend must be one of {BLEND_MODES}, got {self.blend!r}")


def _tile_starts(extent: int, tile: int, stride: int) -> list[int]:
    starts = list(range(0, extent - tile + 1, stride))
    if starts[-1] + tile < extent:
        starts.append(extent - tile)
    return starts


def _feather_profile(length: int, overlap: int) -> np.ndarray:
    """Per-axis weight: linear ramp of width `overlap` at each end, else 1.

    Strictly positive everywhere (minimum 1/(overlap+1)), so normalized
    blending is well defined at every pixel.
    """
    p = np.ones(length, dtype=np.float64)
    for i in range(min(overlap, length)):
        ramp = (i + 1) / (overlap + 1)
        p[i] = min(p[i], ramp)
        p[length - 1 - i] = min(p[length - 1 - i], ramp)
    return p


def tiled_restore(restore: Restorer, img: ImageBuffer, cfg: TileConfig) -> ImageBuffer:
    """Restore tile-by-tile and reassemble with weight-normalized blending.

    If the image is smaller than the tile in either axis, the whole image
    is handed to the restorer as a single tile.
    """
    if img.width < cfg.tile or img.height < cfg.tile:
        out = restore(img)
        if (out.width, out.height, out.channels) != (img.width, img.height, img.channels):
            raise TilingError(
                f"restorer changed single-tile dimensions: "
                f"{img.width}x{img.height} -> {out.width}x{out.height}"
            )
        return out

    stride = cfg.tile - cfg.overlap
    ys = _tile_starts(img.height, cfg.tile, stride)
    xs = _tile_starts(img.width, cfg.tile, stride)

    if cfg.blend == "linear_feather":
        profile = _feather_profile(cfg.tile, cfg.overlap)
        tile_weight = np.outer(profile, profile)
    else:
        tile_weight = np.ones((cfg.tile, cfg.tile), dtype=np.float64)

    acc = np.zeros_like(img.data)
    wsum = np.zeros((img.height, img.width), dtype=np.float64)
    for y in ys:
        for x in xs:
            tile_img = ImageBuffer(img.data[y:y + cfg.tile, x:x + cfg.tile, :])
            restored = restore(tile_img)
            if (restored.width, restored.height, restored.channels) != (
                cfg.tile, cfg.tile, img.channels
            ):
                raise TilingError(
                    f"restorer changed tile dimensions at (x={x}, y={y}): "
                    f"{cfg.tile}x{cfg.tile} -> {restored.width}x{restored.height}"
                )
            acc[y:y + cfg.tile, x:x + cfg.tile, :] += (
                tile_weight[:, :, None] * restored.data
            )
            wsum[y:y + cfg.tile, x:x + cfg.tile] += tile_weight
    if wsum.min() <= 0:
        raise TilingError("internal error: uncovered pixels in tile grid")
    return ImageBuffer(np.clip(acc / wsum[:, :, None], 0.0, 1.0))
