import csv
import json
import os

import numpy as np
import pytest
import yaml

from dehazekit import build_manifest, crop_to_multiple, load_png, save_png
from dehazekit.cli import build_parser, main

from conftest import random_image


def run_cli(*argv):
    return main(list(argv))


class TestParser:
    def test_help_on_every_subcommand(self, capsys):
        for sub in ("curate", "crop", "ensemble", "fuse", "tile", "eval", "run"):
            with pytest.raises(SystemExit) as exc:
                build_parser().parse_args([sub, "--help"])
            assert exc.value.code == 0
            assert "usage" in capsys.readouterr().out

    def test_unknown_flag_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            build_parser().parse_args(["crop", "--bogus"])
        assert exc.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_unknown_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            build_parser().parse_args(["transmogrify"])
        assert exc.value.code == 2


class TestCrop:
    def test_file_to_file(self, tmp_path, rng):
        src = tmp_path / "in.png"
        save_png(random_image(rng, 19, 21), src)
        out = tmp_path / "out.png"
        assert run_cli("crop", "--input", str(src), "--output", str(out)) == 0
        img = load_png(out)
        assert (img.width, img.height) == (16, 16)

    def test_directory_mode(self, tmp_path, rng):
        src = tmp_path / "in"
        src.mkdir()
        for name in ("a.png", "b.png"):
            save_png(random_image(rng, 17, 25), src / name)
        out = tmp_path / "out"
        assert run_cli("crop", "--input", str(src), "--output", str(out)) == 0
        assert sorted(os.listdir(out)) == ["a.png", "b.png"]

    def test_missing_input_is_operational_failure(self, tmp_path, capsys):
        code = run_cli(
            "crop", "--input", str(tmp_path / "none.png"), "--output", str(tmp_path / "o.png")
        )
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestFuse:
    def test_degenerate_weights_byte_identical_to_reencode(self, tmp_path, rng):
        paths = []
        for name in ("a", "b", "c"):
            img = random_image(rng, 10, 12)
            path = tmp_path / f"{name}.png"
            save_png(img, path)
            paths.append(str(path))
        out = tmp_path / "fused.png"
        assert run_cli("fuse", *paths, "--weights", "0,0,1", "--output", str(out)) == 0
        reencoded = tmp_path / "c_reenc.png"
        save_png(load_png(paths[2]), reencoded)
        assert out.read_bytes() == reencoded.read_bytes()

    def test_weight_sum_error(self, tmp_path, rng, capsys):
        a = tmp_path / "a.png"
        save_png(random_image(rng, 8, 8), a)
        code = run_cli("fuse", str(a), "--weights", "0.5", "--output", str(tmp_path / "o.png"))
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_normalize_flag(self, tmp_path, rng):
        a = tmp_path / "a.png"
        save_png(random_image(rng, 8, 8), a)
        out = tmp_path / "o.png"
        assert run_cli("fuse", str(a), "--weights", "4", "--normalize",
                       "--output", str(out)) == 0
        assert load_png(out).data == pytest.approx(load_png(a).data)


class TestEnsembleAndTile:
    def test_ensemble_identity_reproduces_input(self, tmp_path, rng):
        src = tmp_path / "in.png"
        img = random_image(rng, 12, 16)
        save_png(img, src)
        out = tmp_path / "out.png"
        assert run_cli("ensemble", "--restorer", "identity",
                       "--input", str(src), "--output", str(out)) == 0
        assert np.array_equal(load_png(out).data, load_png(src).data)

    def test_tile_pixelwise_matches_plain_restorer(self, tmp_path, rng):
        from dehazekit.restorers import RestorerSpec, restore

        src = tmp_path / "in.png"
        img = random_image(rng, 48, 64)
        save_png(img, src)
        out = tmp_path / "out.png"
        assert run_cli("tile", "--restorer", "gamma:2.0", "--input", str(src),
                       "--output", str(out), "--tile", "32", "--overlap", "8") == 0
        expected = restore(RestorerSpec("gamma", gamma=2.0), load_png(src))
        assert np.max(np.abs(load_png(out).data - expected.data)) <= 1.0 / 255.0


class TestCurate:
    def write_embeddings(self, path, rows):
        with open(path, "w", encoding="utf-8") as fh:
            for rec_id, source, vec in rows:
                fh.write(f"{rec_id}\t{source}\t{','.join(map(repr, vec))}\n")

    def test_threshold_run_with_outputs(self, tmp_path, capsys):
        targets = tmp_path / "targets.tsv"
        self.write_embeddings(targets, [("t0", "night", (1.0, 0.0)), ("t1", "night", (1.0, 0.1))])
        cands = tmp_path / "cands.tsv"
        self.write_embeddings(
            cands,
            [
                ("c0", "ihaze", (1.0, 0.0)),
                ("c1", "ihaze", (0.0, 1.0)),
                ("c2", "dense", (0.9, 0.1)),
            ],
        )
        report = tmp_path / "report.tsv"
        selected = tmp_path / "selected.tsv"
        summary = tmp_path / "summary.json"
        code = run_cli(
            "curate", "--targets", str(targets), "--candidates", str(cands),
            "--mode", "threshold", "--tau", "0.5",
            "--report", str(report), "--selected", str(selected),
            "--summary", str(summary),
        )
        assert code == 0
        doc = json.loads(summary.read_text())
        assert doc["per_source"]["ihaze"] == {"kept": 1, "total": 2}
        assert doc["per_source"]["dense"] == {"kept": 1, "total": 1}
        out = capsys.readouterr().out
        assert "total: kept 2 / 3" in out

        from dehazekit import load_embeddings

        kept = load_embeddings(selected)
        assert sorted(e.id for e in kept) == ["c0", "c2"]

    def test_missing_tau_is_operational_error(self, tmp_path, capsys):
        targets = tmp_path / "t.tsv"
        self.write_embeddings(targets, [("t", "n", (1.0, 0.0))])
        code = run_cli("curate", "--targets", str(targets), "--candidates", str(targets),
                       "--mode", "threshold")
        assert code == 1
        assert "tau" in capsys.readouterr().err


def make_dataset(tmp_path, rng, scenes=("s1", "s2")):
    root = tmp_path / "data"
    for scene in scenes:
        d = root / scene
        d.mkdir(parents=True)
        save_png(random_image(rng, 24, 32), d / "img_0.png")
        save_png(random_image(rng, 24, 32), d / "img_1.png")
    return root


class TestEval:
    def test_identical_restored_and_gt(self, tmp_path, rng, capsys):
        root = make_dataset(tmp_path, rng)
        manifest = build_manifest(root)
        restored = tmp_path / "restored"
        restored.mkdir()
        for p in manifest.pairs:
            save_png(crop_to_multiple(load_png(p.gt_path), 8), restored / f"{p.pair_id}.png")
        out_dir = tmp_path / "report"
        code = run_cli("eval", "--restored", str(restored), "--data", str(root),
                       "--out-dir", str(out_dir), "--no-figures")
        assert code == 0
        with open(out_dir / "report.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2
        for row in rows:
            assert row["psnr_y"] == "inf"
            assert float(row["ssim_y"]) == 1.0
        doc = json.loads((out_dir / "report.json").read_text())
        assert doc["means"]["ssim_y"] == 1.0

    def test_figure_rendered_next_to_csv(self, tmp_path, rng):
        root = make_dataset(tmp_path, rng)
        manifest = build_manifest(root)
        restored = tmp_path / "restored"
        restored.mkdir()
        for p in manifest.pairs:
            save_png(crop_to_multiple(load_png(p.input_path), 8), restored / f"{p.pair_id}.png")
        out_dir = tmp_path / "report"
        code = run_cli("eval", "--restored", str(restored), "--data", str(root),
                       "--out-dir", str(out_dir))
        assert code == 0
        assert (out_dir / "report.png").stat().st_size > 0

    def test_partial_failure_exits_nonzero(self, tmp_path, rng, capsys):
        root = make_dataset(tmp_path, rng)
        restored = tmp_path / "restored"
        restored.mkdir()
        manifest = build_manifest(root)
        save_png(
            crop_to_multiple(load_png(manifest.pairs[0].gt_path), 8),
            restored / "s1.png",
        )
        out_dir = tmp_path / "report"
        code = run_cli("eval", "--restored", str(restored), "--data", str(root),
                       "--out-dir", str(out_dir), "--no-figures")
        assert code == 1
        assert "FAILED s2" in capsys.readouterr().err


class TestRun:
    def write_config(self, tmp_path, out_dir):
        doc = {
            "schema_version": 1,
            "output_dir": str(out_dir),
            "snapshots": [
                {"label": "80k", "kind": "gamma", "gamma": 0.9},
                {"label": "100k", "kind": "identity"},
                {"label": "200k", "kind": "box_blur", "radius": 1},
            ],
            "fusion": {"weights": [0.04, 0.01, 0.95]},
        }
        path = tmp_path / "cfg.yaml"
        path.write_text(yaml.safe_dump(doc), encoding="utf-8")
        return path

    def test_run_matches_run_pipeline(self, tmp_path, rng):
        from dehazekit import FusionWeights, PipelineConfig, RestorerSpec, run_pipeline

        root = make_dataset(tmp_path, rng)
        out_dir = tmp_path / "out_cli"
        cfg_path = self.write_config(tmp_path, out_dir)
        code = run_cli("run", "--config", str(cfg_path), "--data", str(root), "--no-figures")
        assert code == 0

        api_out = tmp_path / "out_api"
        cfg = PipelineConfig(
            snapshots=(
                RestorerSpec("gamma", label="80k", gamma=0.9),
                RestorerSpec("identity", label="100k"),
                RestorerSpec("box_blur", label="200k", radius=1),
            ),
            fusion=FusionWeights([0.04, 0.01, 0.95], labels=["80k", "100k", "200k"]),
            output_dir=str(api_out),
        )
        result = run_pipeline(build_manifest(root), cfg)

        with open(out_dir / "report.csv") as fh:
            cli_rows = list(csv.DictReader(fh))
        for row, entry in zip(cli_rows, result.report.entries):
            assert row["pair_id"] == entry.pair_id
            assert float(row["psnr_y"]) == entry.psnr_y
            assert float(row["ssim_rgb"]) == entry.ssim_rgb
        for p in build_manifest(root).pairs:
            a = (out_dir / f"{p.pair_id}.png").read_bytes()
            b = (api_out / f"{p.pair_id}.png").read_bytes()
            assert a == b

    def test_baseline_report_written(self, tmp_path, rng):
        root = make_dataset(tmp_path, rng)
        out_dir = tmp_path / "out"
        cfg_path = self.write_config(tmp_path, out_dir)
        assert run_cli("run", "--config", str(cfg_path), "--data", str(root),
                       "--no-figures") == 0
        assert (out_dir / "input_baseline.csv").exists()
        assert (out_dir / "report.json").exists()

    def test_missing_data_root_is_error(self, tmp_path, capsys):
        cfg_path = self.write_config(tmp_path, tmp_path / "out")
        assert run_cli("run", "--config", str(cfg_path)) == 1
        assert "no dataset root" in capsys.readouterr().err
