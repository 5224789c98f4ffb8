"""Command-line interface.

Subcommands: curate, crop, ensemble, fuse, tile, eval, run. Operational
failures exit 1 with an `error:` message; bad usage exits 2.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from .curation import (
    CurationConfig,
    load_embeddings,
    score_candidates,
    score_candidates_max,
    select,
    selection_summary,
    target_centroid,
    write_selection_report,
    write_selection_summary,
)
from .errors import CurationError, DehazekitError
from .fusion import FusionWeights, fuse
from .geometry import self_ensemble
from .image import crop_to_multiple, load_png, save_png
from .manifest import build_manifest
from .metrics import ExternalMetric, write_report_csv, write_report_json
from .pipeline import evaluate_directory, load_pipeline_config, run_pipeline
from .restorers import as_function, parse_restorer_spec
from .tiling import TileConfig, tiled_restore


def _print_means(label: str, report) -> None:
    cols = " ".join(
        f"{name}={'inf' if math.isinf(v) else format(v, '.4f')}"
        for name, v in report.means.items()
    )
    print(f"{label}: {cols}")


def _iter_images(input_path: str, output_path: str):
    """Yield (in_file, out_file); dir inputs map to same-named files in out dir."""
    if os.path.isdir(input_path):
        os.makedirs(output_path, exist_ok=True)
        names = sorted(n for n in os.listdir(input_path) if n.lower().endswith(".png"))
        if not names:
            raise DehazekitError(f"no PNG files in {input_path}")
        for name in names:
            yield os.path.join(input_path, name), os.path.join(output_path, name)
    else:
        parent = os.path.dirname(os.path.abspath(output_path))
        os.makedirs(parent, exist_ok=True)
        yield input_path, output_path


def cmd_curate(args) -> int:
    targets = load_embeddings(args.targets)
    candidates = []
    for path in args.candidates:
        candidates.extend(load_embeddings(path))
    if args.aggregate == "max":
        records = score_candidates_max(targets, candidates)
    else:
        records = score_candidates(target_centroid(targets), candidates)

    if args.mode == "threshold":
        if args.tau is None:
            raise CurationError("threshold mode needs --tau")
        cfg = CurationConfig.threshold(args.tau)
    elif args.mode == "top-k-global":
        if args.k is None:
            raise CurationError("top-k-global mode needs --k")
        cfg = CurationConfig.top_k_global(args.k)
    else:
        k_map = {}
        for item in args.per_source or []:
            source, _, count = item.partition("=")
            if not count:
                raise CurationError(f"--per-source expects SOURCE=K, got {item!r}")
            k_map[source] = int(count)
        cfg = CurationConfig.top_k_per_source(k_map)

    marked = select(records, cfg)
    if args.report:
        write_selection_report(marked, candidates, args.report)
    if args.selected:
        from .curation import save_embeddings

        keep = {(r.source, r.id) for r in marked if r.selected}
        save_embeddings(
            [e for e in candidates if (e.source, e.id) in keep], args.selected
        )
    if args.summary:
        write_selection_summary(marked, args.summary)
    summary = selection_summary(marked)
    for source, counts in summary["per_source"].items():
        print(f"{source}: kept {counts['kept']} / {counts['total']}")
    total = summary["total"]
    print(f"total: kept {total['kept']} / {total['total']}")
    return 0


def cmd_crop(args) -> int:
    count = 0
    for in_file, out_file in _iter_images(args.input, args.output):
        save_png(crop_to_multiple(load_png(in_file), args.multiple), out_file)
        count += 1
    print(f"cropped {count} image(s) to multiples of {args.multiple}")
    return 0


def _build_restorer(args):
    spec = parse_restorer_spec(args.restorer, workdir=getattr(args, "workdir", "."))
    return as_function(spec)


def cmd_ensemble(args) -> int:
    restorer = _build_restorer(args)
    for in_file, out_file in _iter_images(args.input, args.output):
        save_png(self_ensemble(restorer, load_png(in_file)), out_file)
        print(f"wrote {out_file}")
    return 0


def cmd_fuse(args) -> int:
    weights = [float(w) for w in args.weights.split(",")]
    labels = args.labels.split(",") if args.labels else None
    fw = FusionWeights(weights, labels=labels, auto_normalize=args.normalize)
    images = [load_png(p) for p in args.images]
    save_png(fuse(images, fw), args.output)
    print(f"wrote {args.output}")
    return 0


def cmd_tile(args) -> int:
    restorer = _build_restorer(args)
    cfg = TileConfig(tile=args.tile, overlap=args.overlap, blend=args.blend)
    for in_file, out_file in _iter_images(args.input, args.output):
        save_png(tiled_restore(restorer, load_png(in_file), cfg), out_file)
        print(f"wrote {out_file}")
    return 0


def cmd_eval(args) -> int:
    manifest = build_manifest(args.data)
    extra = tuple(
        ExternalMetric(name=item.split(":", 1)[0], command=item.split(":", 1)[1])
        for item in args.extra_metric or []
    )
    report, failed = evaluate_directory(args.restored, manifest, extra)
    os.makedirs(args.out_dir, exist_ok=True)
    write_report_csv(report, os.path.join(args.out_dir, "report.csv"))
    write_report_json(report, os.path.join(args.out_dir, "report.json"))
    if not args.no_figures:
        from .figures import render_report_figure

        render_report_figure(
            report, os.path.join(args.out_dir, "report.png"), title="eval"
        )
    _print_means("means", report)
    for pair_id, message in failed:
        print(f"FAILED {pair_id}: {message}", file=sys.stderr)
    return 1 if failed else 0


def cmd_run(args) -> int:
    cfg, data_root = load_pipeline_config(args.config)
    root = args.data or data_root
    if not root:
        raise DehazekitError("no dataset root: pass --data or set data_root in the config")
    manifest = build_manifest(root)
    result = run_pipeline(manifest, cfg)
    write_report_csv(result.report, os.path.join(cfg.output_dir, "report.csv"))
    write_report_json(result.report, os.path.join(cfg.output_dir, "report.json"))
    write_report_csv(result.baseline, os.path.join(cfg.output_dir, "input_baseline.csv"))
    write_report_json(result.baseline, os.path.join(cfg.output_dir, "input_baseline.json"))
    if not args.no_figures:
        from .figures import render_report_figure

        render_report_figure(
            result.report,
            os.path.join(cfg.output_dir, "report.png"),
            baseline=result.baseline,
            title="pipeline vs input baseline",
        )
    _print_means("input", result.baseline)
    _print_means("restored", result.report)
    if manifest.skipped:
        print(f"skipped scenes: {', '.join(manifest.skipped)}", file=sys.stderr)
    for pair_id, message in result.failed:
        print(f"FAILED {pair_id}: {message}", file=sys.stderr)
    return 1 if result.failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dehazekit",
        description="Nighttime-dehazing pipeline harness: curation, x8 "
        "self-ensemble, snapshot fusion, tiled inference, PSNR/SSIM reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curate", help="screen candidate embeddings against a target domain")
    p.add_argument("--targets", required=True, help="embedding file of the target domain")
    p.add_argument("--candidates", required=True, nargs="+", help="candidate embedding file(s)")
    p.add_argument("--mode", required=True,
                   choices=["threshold", "top-k-global", "top-k-per-source"])
    p.add_argument("--tau", type=float, help="similarity threshold for threshold mode")
    p.add_argument("--k", type=int, help="count for top-k-global mode")
    p.add_argument("--per-source", action="append", metavar="SOURCE=K",
                   help="per-source count for top-k-per-source mode (repeatable)")
    p.add_argument("--aggregate", choices=["centroid", "max"], default="centroid")
    p.add_argument("--report", help="write full scored report (TSV + selected column)")
    p.add_argument("--selected", help="write retained embeddings (loadable TSV)")
    p.add_argument("--summary", help="write JSON per-source kept/total summary")
    p.set_defaults(func=cmd_curate)

    p = sub.add_parser("crop", help="crop image(s) to multiples of N (top-left anchor)")
    p.add_argument("--input", required=True, help="PNG file or directory")
    p.add_argument("--output", required=True, help="output file or directory")
    p.add_argument("--multiple", type=int, default=8)
    p.set_defaults(func=cmd_crop)

    p = sub.add_parser("ensemble", help="x8 flip/transpose self-ensemble around one restorer")
    p.add_argument("--restorer", required=True,
                   help="identity | gamma:G | box_blur:R | external:COMMAND")
    p.add_argument("--workdir", default=".", help="scratch dir for external restorers")
    p.add_argument("--input", required=True, help="PNG file or directory")
    p.add_argument("--output", required=True, help="output file or directory")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("fuse", help="weighted fusion of aligned images")
    p.add_argument("images", nargs="+", help="input PNGs, one per weight")
    p.add_argument("--weights", required=True, help="comma-separated weights, e.g. 0.04,0.01,0.95")
    p.add_argument("--labels", help="comma-separated snapshot labels (defaults to indices)")
    p.add_argument("--normalize", action="store_true", help="rescale weights to sum to 1")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("tile", help="overlap-tiled restoration")
    p.add_argument("--restorer", required=True)
    p.add_argument("--workdir", default=".")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--tile", type=int, default=512)
    p.add_argument("--overlap", type=int, default=32)
    p.add_argument("--blend", choices=["uniform_average", "linear_feather"],
                   default="linear_feather")
    p.set_defaults(func=cmd_tile)

    p = sub.add_parser("eval", help="score a directory of {pair_id}.png against a dataset")
    p.add_argument("--restored", required=True, help="directory of restored PNGs")
    p.add_argument("--data", required=True, help="dataset root (img_0/img_1 scene layout)")
    p.add_argument("--out-dir", required=True, help="where report.csv/json/png go")
    p.add_argument("--extra-metric", action="append", metavar="NAME:COMMAND",
                   help="external per-pair metric; command gets {a} and {b} paths")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("run", help="full pipeline from a YAML config")
    p.add_argument("--config", required=True)
    p.add_argument("--data", help="dataset root; overrides data_root in the config")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_run)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DehazekitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
