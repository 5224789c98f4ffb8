"""Dataset manifest construction from the per-scene directory layout.

Each scene directory holds an input matching `img_0*` and a ground
truth matching `img_1*`; an optional haze level 1-5 is read from a
trailing digit in the scene name. Scenes missing either file are
reported as skipped, never silently dropped.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass

from .errors import ManifestError

_LEVEL_RE = re.compile(r"([1-5])$")


@dataclass(frozen=True)
class Pair:
    pair_id: str
    input_path: str
    gt_path: str
    haze_level: int | None = None


@dataclass(frozen=True)
class PairManifest:
    pairs: tuple[Pair, ...]
    skipped: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.pairs)


def _find_one(scene_dir: str, prefix: str) -> str | None:
    hits = sorted(
        name for name in os.listdir(scene_dir)
        if name.startswith(prefix)
        and os.path.isfile(os.path.join(scene_dir, name))
    )
    return os.path.join(scene_dir, hits[0]) if hits else None


def build_manifest(root_dir: str | os.PathLike) -> PairManifest:
    """One pair per scene directory, deterministically ordered by scene name."""
    root_dir = os.fspath(root_dir)
    if not os.path.isdir(root_dir):
        raise ManifestError(f"dataset root does not exist: {root_dir}")
    pairs: list[Pair] = []
    skipped: list[str] = []
    for scene in sorted(os.listdir(root_dir)):
        scene_dir = os.path.join(root_dir, scene)
        if not os.path.isdir(scene_dir):
            continue
        input_path = _find_one(scene_dir, "img_0")
        gt_path = _find_one(scene_dir, "img_1")
        if input_path is None or gt_path is None:
            skipped.append(scene)
            continue
        m = _LEVEL_RE.search(scene)
        level = int(m.group(1)) if m else None
        pairs.append(Pair(scene, input_path, gt_path, level))
    if not pairs:
        raise ManifestError(f"no valid pairs under {root_dir}")
    return PairManifest(pairs=tuple(pairs), skipped=tuple(skipped))
