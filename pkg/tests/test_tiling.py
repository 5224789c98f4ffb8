import numpy as np
import pytest

from dehazekit import ImageBuffer, TileConfig, tiled_restore
from dehazekit.errors import TilingError
from dehazekit.restorers import RestorerSpec, as_function
from dehazekit.tiling import _feather_profile, _tile_starts

from oracles import tiled_accumulate_loop


class TestConfig:
    def test_tile_multiple_of_8(self):
        with pytest.raises(TilingError):
            TileConfig(tile=100)

    def test_overlap_below_half_tile(self):
        with pytest.raises(TilingError):
            TileConfig(tile=64, overlap=32)

    def test_unknown_blend(self):
        with pytest.raises(TilingError):
            TileConfig(blend="cosine")


class TestGrid:
    def test_final_tile_shifted_inward(self):
        # extent 100, tile 64, stride 48 -> starts 0 and 36 (not 48)
        assert _tile_starts(100, 64, 48) == [0, 36]

    def test_exact_cover_no_extra_tile(self):
        assert _tile_starts(128, 64, 64) == [0, 64]

    def test_profile_positive_and_symmetric(self):
        p = _feather_profile(16, 4)
        assert p.min() > 0
        assert np.allclose(p, p[::-1])
        assert np.all(p[4:12] == 1.0)


class TestTiledRestore:
    def test_identity_any_config(self, rng):
        img = ImageBuffer(rng.random((96, 160, 3)))
        for blend in ("uniform_average", "linear_feather"):
            for overlap in (0, 8, 16):
                cfg = TileConfig(tile=64, overlap=overlap, blend=blend)
                out = tiled_restore(lambda x: x, img, cfg)
                assert np.max(np.abs(out.data - img.data)) <= 1e-7

    def test_pixelwise_gamma_equals_whole_image(self, rng):
        img = ImageBuffer(rng.random((96, 160, 3)))
        gamma = as_function(RestorerSpec("gamma", gamma=2.0))
        cfg = TileConfig(tile=64, overlap=16)
        out = tiled_restore(gamma, img, cfg)
        assert np.max(np.abs(out.data - gamma(img).data)) <= 1e-7

    def test_box_blur_matches_accumulation_oracle(self, rng):
        img = ImageBuffer(rng.random((96, 160, 3)))
        blur = as_function(RestorerSpec("box_blur", radius=2))
        for blend in ("uniform_average", "linear_feather"):
            cfg = TileConfig(tile=64, overlap=16, blend=blend)
            out = tiled_restore(blur, img, cfg)
            expected = tiled_accumulate_loop(
                lambda a: blur(ImageBuffer(a)).data, img.data, 64, 16, blend
            )
            assert np.max(np.abs(out.data - expected)) <= 1e-12

    def test_small_image_single_tile(self, rng):
        img = ImageBuffer(rng.random((40, 200, 3)))  # height below tile
        calls = []

        def spy(x):
            calls.append((x.height, x.width))
            return x

        out = tiled_restore(spy, img, TileConfig(tile=64, overlap=8))
        assert calls == [(40, 200)]
        assert np.array_equal(out.data, img.data)

    def test_zero_overlap_uniform_is_pure_paste(self, rng):
        img = ImageBuffer(rng.random((128, 192, 3)))
        cfg = TileConfig(tile=64, overlap=0, blend="uniform_average")
        gamma = as_function(RestorerSpec("gamma", gamma=0.5))

        seen = {}

        def record(x):
            out = gamma(x)
            seen[id(x)] = out
            return out

        out = tiled_restore(record, img, cfg)
        # aligned dims: every pixel covered exactly once
        expected = gamma(img)
        assert np.max(np.abs(out.data - expected.data)) <= 1e-12

    def test_weight_coverage_everywhere(self, rng):
        # boundary-shifted final tiles still leave no uncovered pixels
        img = ImageBuffer(rng.random((100, 148, 3)))
        cfg = TileConfig(tile=64, overlap=16, blend="linear_feather")
        out = tiled_restore(lambda x: x, img, cfg)
        assert np.all(np.isfinite(out.data))
        assert np.max(np.abs(out.data - img.data)) <= 1e-7

    def test_restorer_breaking_tile_dims_reported(self, rng):
        img = ImageBuffer(rng.random((128, 128, 3)))

        def bad(x):
            return ImageBuffer(x.data[:-8, :, :])

        with pytest.raises(TilingError, match="changed tile dimensions"):
            tiled_restore(bad, img, TileConfig(tile=64, overlap=8))
