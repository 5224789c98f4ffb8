import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dehazekit import ImageBuffer


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_image(rng, height, width, channels=3):
    return ImageBuffer(rng.random((height, width, channels)))


@pytest.fixture
def make_image(rng):
    def _make(height=16, width=24, channels=3):
        return random_image(rng, height, width, channels)

    return _make


def build_scene_tree(root, scenes, rng, height=24, width=32):
    """Create scene dirs with img_0.png / img_1.png pairs and return paths."""
    from dehazekit import save_png

    root = Path(root)
    for scene in scenes:
        scene_dir = root / scene
        scene_dir.mkdir(parents=True)
        save_png(random_image(rng, height, width), scene_dir / "img_0.png")
        save_png(random_image(rng, height, width), scene_dir / "img_1.png")
    return root


@pytest.fixture
def scene_tree(tmp_path, rng):
    def _build(scenes, height=24, width=32):
        return build_scene_tree(tmp_path / "data", scenes, rng, height, width)

    return _build
