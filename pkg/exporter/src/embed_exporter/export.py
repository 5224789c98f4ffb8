"""Batch export of image embeddings in the curation harness's file format.

One `id<TAB>source<TAB>v1,...,vD` line per image, ids being filenames
without extension. Vectors are L2-normalized at export so downstream
cosine scoring reduces to a dot product.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass

import cv2
import numpy as np

from .encoders import make_encoder

log = logging.getLogger(__name__)

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".webp")


class ExportError(Exception):
    pass


@dataclass(frozen=True)
class ExportJob:
    image_dir: str
    source_tag: str
    output_path: str
    batch_size: int = 16
    encoder: str = "clip"

    def __post_init__(self):
        if not os.path.isdir(self.image_dir):
            raise ExportError(f"image directory does not exist: {self.image_dir}")
        if not self.source_tag:
            raise ExportError("source tag must be non-empty")
        if self.batch_size < 1:
            raise ExportError(f"batch size must be >= 1, got {self.batch_size}")


def _load_rgb(path: str) -> np.ndarray | None:
    decoded = cv2.imread(path, cv2.IMREAD_COLOR)
    if decoded is None:
        return None
    return decoded[:, :, ::-1].astype(np.float64) / 255.0


def export_embeddings(job: ExportJob) -> int:
    """Encode every decodable image in the directory; returns the record count."""
    names = sorted(
        n for n in os.listdir(job.image_dir)
        if n.lower().endswith(IMAGE_EXTENSIONS)
    )
    encoder = make_encoder(job.encoder)

    records: list[tuple[str, np.ndarray]] = []
    batch_ids: list[str] = []
    batch_imgs: list[np.ndarray] = []

    def flush():
        if not batch_imgs:
            return
        vectors = encoder.encode_batch(batch_imgs)
        records.extend(zip(batch_ids, vectors))
        batch_ids.clear()
        batch_imgs.clear()

    for name in names:
        img = _load_rgb(os.path.join(job.image_dir, name))
        if img is None:
            log.warning("skipping undecodable image: %s", name)
            continue
        batch_ids.append(os.path.splitext(name)[0])
        batch_imgs.append(img)
        if len(batch_imgs) >= job.batch_size:
            flush()
    flush()

    if not records:
        raise ExportError(f"no decodable images in {job.image_dir}")

    with open(job.output_path, "w", encoding="utf-8", newline="\n") as fh:
        for rec_id, vector in records:
            values = ",".join(repr(float(v)) for v in vector)
            fh.write(f"{rec_id}\t{job.source_tag}\t{values}\n")
    return len(records)
