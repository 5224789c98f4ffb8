"""CLI: `embed-exporter export --dir D --source TAG --out F [--batch N]`."""

from __future__ import annotations

import argparse
import sys

from .export import ExportError, ExportJob, export_embeddings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-exporter",
        description="Run a visual encoder over an image directory and write "
        "embedding files for the dehazing harness's curation stage.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("export", help="export one directory to one embedding file")
    p.add_argument("--dir", required=True, help="directory of images")
    p.add_argument("--source", required=True, help="dataset tag written per record")
    p.add_argument("--out", required=True, help="output embedding file")
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--encoder", choices=["clip", "stats"], default="clip",
                   help="clip needs pretrained weights; stats is self-contained")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = ExportJob(
            image_dir=args.dir,
            source_tag=args.source,
            output_path=args.out,
            batch_size=args.batch,
            encoder=args.encoder,
        )
        count = export_embeddings(job)
    except (ExportError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {count} records to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
