"""Weighted snapshot fusion: convex combination of restorer outputs in image space."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FusionError
from .image import ImageBuffer

WEIGHT_SUM_TOL = 1e-6


@dataclass(frozen=True)
class FusionWeights:
    """Non-negative weights summing to 1, one per labeled snapshot.

    With auto_normalize the weights are rescaled to sum to exactly 1 at
    construction; otherwise the sum must already be within 1e-6 of 1.
    """

    weights: tuple[float, ...]
    labels: tuple[str, ...]
    auto_normalize: bool = False

    def __init__(self, weights, labels=None, auto_normalize: bool = False):
        weights = tuple(float(w) for w in weights)
        if labels is None:
            labels = tuple(str(i) for i in range(len(weights)))
        else:
            labels = tuple(str(l) for l in labels)
        if len(labels) != len(weights):
            raise FusionError(
                f"{len(weights)} weights but {len(labels)} labels"
            )
        if len(weights) == 0:
            raise FusionError("at least one weight required")
        if len(set(labels)) != len(labels):
            raise FusionError(f"duplicate snapshot labels: {labels}")
        for label, w in zip(labels, weights):
            if not np.isfinite(w) or w < 0:
                raise FusionError(f"weight for {label!r} must be finite and >= 0, got {w}")
        total = sum(weights)
        if auto_normalize:
            if total <= 0:
                raise FusionError("cannot normalize weights summing to 0")
            weights = tuple(w / total for w in weights)
        elif abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise FusionError(
                f"weights sum to {total}, expected 1 +- {WEIGHT_SUM_TOL} "
                "(pass auto_normalize=True to rescale)"
            )
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "auto_normalize", auto_normalize)

    def __len__(self) -> int:
        return len(self.weights)


def fuse(images: list[ImageBuffer], w: FusionWeights) -> ImageBuffer:
    """Per-sample weighted sum of the snapshots, clamped to [0, 1].

    Summation runs in ascending-label order, so jointly permuting
    (images, weights) leaves the result bit-identical.
    """
    if len(images) == 0:
        raise FusionError("need at least one image")
    if len(images) != len(w):
        raise FusionError(f"{len(images)} images but {len(w)} weights")
    first = images[0]
    for i, img in enumerate(images):
        if (img.width, img.height, img.channels) != (
            first.width, first.height, first.channels
        ):
            raise FusionError(
                f"image {i} ({w.labels[i]!r}) is {img.width}x{img.height}x{img.channels}, "
                f"expected {first.width}x{first.height}x{first.channels}"
            )
    order = sorted(range(len(images)), key=lambda i: w.labels[i])
    acc = np.zeros_like(first.data)
    for i in order:
        acc += w.weights[i] * images[i].data
    return ImageBuffer(np.clip(acc, 0.0, 1.0))
