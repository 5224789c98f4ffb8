"""Image encoders producing unit-norm 512-D feature vectors.

`clip` wraps the pretrained ViT-B/32 visual encoder (via
sentence-transformers) and needs its weights available locally. `stats`
is a self-contained deterministic descriptor - centered thumbnails for
structure plus soft histograms for illumination - with the same output
shape, so the export pipeline and its consumers behave identically
whichever encoder runs.
"""

from __future__ import annotations

import numpy as np

EMBED_DIM = 512


class StatsEncoder:
    """Deterministic 512-D visual descriptor, no weights required.

    Layout: 16x16 mean-centered luma thumbnail (256), 8x8 mean-centered
    RGB thumbnail (192), soft 32-bin luma histogram (32), soft 16-bin
    gradient histogram (16), global moments (16). The histogram blocks
    carry the illumination statistics; soft binning keeps them stable
    under mild photometric shifts.
    """

    name = "stats"
    dim = EMBED_DIM

    HIST_WEIGHT = 2.0
    MOMENT_WEIGHT = 0.5

    def encode_batch(self, images: list[np.ndarray]) -> np.ndarray:
        return np.stack([self._encode(img) for img in images])

    @staticmethod
    def _soft_histogram(values: np.ndarray, bins: int, vmax: float = 1.0) -> np.ndarray:
        """Linear-interpolation binning; rows sum to 1."""
        pos = np.clip(values.ravel() / vmax, 0.0, 1.0) * (bins - 1)
        low = np.floor(pos).astype(np.int64)
        high = np.minimum(low + 1, bins - 1)
        frac = pos - low
        hist = np.bincount(low, weights=1.0 - frac, minlength=bins)
        hist += np.bincount(high, weights=frac, minlength=bins)
        return hist / values.size

    def _encode(self, img: np.ndarray) -> np.ndarray:
        import cv2

        rgb = cv2.resize(img, (64, 64), interpolation=cv2.INTER_AREA)
        luma = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]

        luma_thumb = cv2.resize(luma, (16, 16), interpolation=cv2.INTER_AREA)
        luma_thumb = (luma_thumb - luma_thumb.mean()).ravel()

        rgb_thumb = cv2.resize(rgb, (8, 8), interpolation=cv2.INTER_AREA)
        rgb_thumb = (rgb_thumb - rgb_thumb.mean(axis=(0, 1))).ravel()

        luma_hist = self._soft_histogram(luma, 32) * self.HIST_WEIGHT

        gy, gx = np.gradient(luma)
        grad = np.sqrt(gx * gx + gy * gy)
        grad_hist = self._soft_histogram(grad, 16, vmax=0.5)

        moments = np.array([
            rgb[:, :, 0].mean(), rgb[:, :, 1].mean(), rgb[:, :, 2].mean(),
            rgb[:, :, 0].std(), rgb[:, :, 1].std(), rgb[:, :, 2].std(),
            luma.mean(), luma.std(), luma.min(), luma.max(),
            float(np.median(luma)),
            grad.mean(), grad.std(),
            (rgb.max(axis=2) - rgb.min(axis=2)).mean(),
            float(np.mean(luma < 0.2)),
            float(np.mean(luma > 0.8)),
        ]) * self.MOMENT_WEIGHT

        vec = np.concatenate([luma_thumb, rgb_thumb, luma_hist, grad_hist, moments])
        assert vec.size == EMBED_DIM
        norm = np.linalg.norm(vec)
        if norm == 0.0:  # perfectly flat image: keep a valid unit vector
            vec = np.zeros(EMBED_DIM)
            vec[0] = 1.0
            return vec
        return vec / norm


class ClipEncoder:
    """Pretrained ViT-B/32 visual encoder; weights must be available locally."""

    name = "clip"
    dim = EMBED_DIM

    def __init__(self, model_name: str = "clip-ViT-B-32"):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise RuntimeError(
                "the clip encoder needs sentence-transformers "
                "(pip install embed-exporter[clip])"
            ) from exc
        try:
            self._model = SentenceTransformer(model_name)
        except Exception as exc:
            raise RuntimeError(
                f"could not load {model_name!r}; pretrained weights must be "
                f"downloadable or cached locally ({exc})"
            ) from exc

    def encode_batch(self, images: list[np.ndarray]) -> np.ndarray:
        from PIL import Image

        pil = [Image.fromarray((np.clip(img, 0, 1) * 255).astype(np.uint8)) for img in images]
        feats = self._model.encode(
            pil, batch_size=len(pil), convert_to_numpy=True, show_progress_bar=False
        ).astype(np.float64)
        norms = np.linalg.norm(feats, axis=1, keepdims=True)
        return feats / norms


ENCODERS = {"stats": StatsEncoder, "clip": ClipEncoder}


def make_encoder(name: str):
    if name not in ENCODERS:
        raise ValueError(f"unknown encoder {name!r}; choose from {sorted(ENCODERS)}")
    return ENCODERS[name]()
