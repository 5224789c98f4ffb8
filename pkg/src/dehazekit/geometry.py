"""Dihedral transforms and the x8 self-ensemble wrapper.

The eight symmetries of the pixel grid are encoded as (vflip, hflip,
transpose) applied in that fixed order. Any dimension-preserving
restorer can be wrapped by `self_ensemble`, which averages the eight
back-transformed predictions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import RestorerError
from .image import ImageBuffer

Restorer = Callable[[ImageBuffer], ImageBuffer]


@dataclass(frozen=True)
class DihedralTransform:
    vflip: bool = False
    hflip: bool = False
    transpose: bool = False

    def __str__(self) -> str:
        parts = [name for name, on in
                 (("vflip", self.vflip), ("hflip", self.hflip), ("transpose", self.transpose))
                 if on]
        return "+".join(parts) if parts else "identity"


ALL_TRANSFORMS: tuple[DihedralTransform, ...] = tuple(
    DihedralTransform(v, h, t)
    for v in (False, True)
    for h in (False, True)
    for t in (False, True)
)

IDENTITY = ALL_TRANSFORMS[0]


def apply_transform(t: DihedralTransform, img: ImageBuffer) -> ImageBuffer:
    """Apply vflip, then hflip, then transpose. Pure index permutation."""
    d = img.data
    if t.vflip:
        d = d[::-1, :, :]
    if t.hflip:
        d = d[:, ::-1, :]
    if t.transpose:
        d = np.transpose(d, (1, 0, 2))
    return ImageBuffer(d)


def inverse(t: DihedralTransform) -> DihedralTransform:
    """The group inverse: apply(inverse(t), apply(t, img)) == img exactly.

    Flips commute and are involutions, so (v, h, False) is self-inverse.
    With a trailing transpose the flip axes swap: (v, h, True) inverts to
    (h, v, True).
    """
    if not t.transpose:
        return t
    return DihedralTransform(vflip=t.hflip, hflip=t.vflip, transpose=True)


def self_ensemble(restore: Restorer, img: ImageBuffer) -> ImageBuffer:
    """Average the restorer over all 8 dihedral transforms.

    Each transformed input is restored, mapped back to the original
    coordinates, and the eight predictions are averaged in a fixed
    summation order (bit-reproducible), then clamped to [0, 1].
    """
    acc = np.zeros_like(img.data)
    for t in ALL_TRANSFORMS:
        branch_in = apply_transform(t, img)
        restored = restore(branch_in)
        if (restored.width, restored.height, restored.channels) != (
            branch_in.width,
            branch_in.height,
            branch_in.channels,
        ):
            raise RestorerError(
                f"restorer changed dimensions under transform [{t}]: "
                f"{branch_in.width}x{branch_in.height}x{branch_in.channels} -> "
                f"{restored.width}x{restored.height}x{restored.channels}"
            )
        acc += apply_transform(inverse(t), restored).data
    return ImageBuffer(np.clip(acc / 8.0, 0.0, 1.0))
