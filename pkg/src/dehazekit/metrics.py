"""PSNR and SSIM over RGB and luma, plus report aggregation and serialization.

PSNR is 10*log10(peak^2 / MSE) over all samples. SSIM is the canonical
single-scale variant: 11x11 Gaussian window (sigma 1.5), K1=0.01,
K2=0.03, L=1, averaged over windows that lie fully inside the image.
SSIM-RGB is the mean of the three per-channel scores.
"""

from __future__ import annotations

import csv
import json
import math
import os
import shlex
import subprocess
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import MetricError
from .image import ImageBuffer, LumaPlane, crop_to_multiple, rgb_to_luma

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

CSV_HEADER = ["pair_id", "psnr_y", "ssim_y", "psnr_rgb", "ssim_rgb"]

METRIC_COLUMNS = ("psnr_y", "ssim_y", "psnr_rgb", "ssim_rgb")


def _samples(x) -> np.ndarray:
    if isinstance(x, (ImageBuffer, LumaPlane)):
        return x.data
    raise MetricError(f"expected ImageBuffer or LumaPlane, got {type(x).__name__}")


def psnr(a, b, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; +inf for identical inputs."""
    da, db = _samples(a), _samples(b)
    if da.shape != db.shape:
        raise MetricError(f"shape mismatch: {da.shape} vs {db.shape}")
    mse = float(np.mean((da - db) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def _gaussian_kernel_1d(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    k = np.exp(-(offsets ** 2) / (2.0 * sigma * sigma))
    return k / k.sum()


def _correlate_valid(x: np.ndarray, k1: np.ndarray) -> np.ndarray:
    """Separable 2-D correlation keeping only fully-inside window positions."""
    rows = sliding_window_view(x, len(k1), axis=0) @ k1
    return sliding_window_view(rows, len(k1), axis=1) @ k1


def _ssim_plane(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise MetricError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.shape[0] < SSIM_WINDOW or a.shape[1] < SSIM_WINDOW:
        raise MetricError(
            f"image {a.shape[1]}x{a.shape[0]} smaller than the "
            f"{SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )
    c1 = SSIM_K1 * SSIM_K1
    c2 = SSIM_K2 * SSIM_K2
    k1 = _gaussian_kernel_1d()
    mu1 = _correlate_valid(a, k1)
    mu2 = _correlate_valid(b, k1)
    s11 = _correlate_valid(a * a, k1) - mu1 * mu1
    s22 = _correlate_valid(b * b, k1) - mu2 * mu2
    s12 = _correlate_valid(a * b, k1) - mu1 * mu2
    num = (2.0 * mu1 * mu2 + c1) * (2.0 * s12 + c2)
    den = (mu1 * mu1 + mu2 * mu2 + c1) * (s11 + s22 + c2)
    return float(np.mean(num / den))


def ssim(a, b) -> float:
    """Single-scale SSIM on a luma plane or single-channel image."""
    da, db = _samples(a), _samples(b)
    if da.ndim == 3:
        if da.shape[2] != 1:
            raise MetricError("ssim takes a single channel; use evaluate_pair for RGB")
        da = da[:, :, 0]
    if db.ndim == 3:
        if db.shape[2] != 1:
            raise MetricError("ssim takes a single channel; use evaluate_pair for RGB")
        db = db[:, :, 0]
    return _ssim_plane(da, db)


@dataclass(frozen=True)
class MetricEntry:
    pair_id: str
    psnr_y: float
    ssim_y: float
    psnr_rgb: float
    ssim_rgb: float
    extra: tuple[tuple[str, float], ...] = ()

    def column(self, name: str) -> float:
        if name in METRIC_COLUMNS:
            return getattr(self, name)
        return dict(self.extra)[name]


@dataclass(frozen=True)
class MetricReport:
    entries: tuple[MetricEntry, ...]
    means: dict[str, float]
    inf_excluded: dict[str, int]


def evaluate_pair(restored: ImageBuffer, gt: ImageBuffer, pair_id: str = "") -> MetricEntry:
    """Table-style metric row: both sides cropped to multiples of 8 first."""
    restored = crop_to_multiple(restored, 8)
    gt = crop_to_multiple(gt, 8)
    if (restored.width, restored.height) != (gt.width, gt.height):
        raise MetricError(
            f"pair {pair_id!r}: size mismatch after cropping: "
            f"{restored.width}x{restored.height} vs {gt.width}x{gt.height}"
        )
    if restored.channels != 3 or gt.channels != 3:
        raise MetricError(f"pair {pair_id!r}: evaluation expects RGB images")
    ssim_rgb = float(np.mean([
        _ssim_plane(restored.data[:, :, c], gt.data[:, :, c]) for c in range(3)
    ]))
    luma_r, luma_g = rgb_to_luma(restored), rgb_to_luma(gt)
    return MetricEntry(
        pair_id=pair_id,
        psnr_y=psnr(luma_r, luma_g),
        ssim_y=ssim(luma_r, luma_g),
        psnr_rgb=psnr(restored, gt),
        ssim_rgb=ssim_rgb,
    )


def aggregate(entries: list[MetricEntry]) -> MetricReport:
    """Per-column arithmetic means; infinite PSNR entries are excluded and counted."""
    if not entries:
        raise MetricError("cannot aggregate an empty entry list")
    extra_names = [name for name, _ in entries[0].extra]
    means: dict[str, float] = {}
    inf_excluded: dict[str, int] = {}
    for col in list(METRIC_COLUMNS) + extra_names:
        values = [e.column(col) for e in entries]
        finite = [v for v in values if math.isfinite(v)]
        n_inf = sum(1 for v in values if math.isinf(v))
        if n_inf:
            inf_excluded[col] = n_inf
        means[col] = sum(finite) / len(finite) if finite else math.inf
    return MetricReport(entries=tuple(entries), means=means, inf_excluded=inf_excluded)


def _fmt(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(float(value))


def write_report_csv(report: MetricReport, path: str | os.PathLike) -> None:
    extra_names = [name for name, _ in report.entries[0].extra] if report.entries else []
    with open(os.fspath(path), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER + extra_names)
        for e in report.entries:
            row = [e.pair_id] + [_fmt(e.column(c)) for c in METRIC_COLUMNS]
            row += [_fmt(v) for _, v in e.extra]
            writer.writerow(row)


def report_as_dict(report: MetricReport) -> dict:
    return {
        "entries": [
            {
                "pair_id": e.pair_id,
                **{c: (_fmt(e.column(c)) if math.isinf(e.column(c)) else e.column(c))
                   for c in METRIC_COLUMNS},
                **{name: (_fmt(v) if math.isinf(v) else v) for name, v in e.extra},
            }
            for e in report.entries
        ],
        "means": {k: (_fmt(v) if math.isinf(v) else v) for k, v in report.means.items()},
        "inf_excluded": report.inf_excluded,
    }


def write_report_json(report: MetricReport, path: str | os.PathLike) -> None:
    with open(os.fspath(path), "w", encoding="utf-8") as fh:
        json.dump(report_as_dict(report), fh, indent=2)
        fh.write("\n")


@dataclass(frozen=True)
class ExternalMetric:
    """Hook for an out-of-process metric (e.g. a learned perceptual score).

    The command template gets `{a}` and `{b}` substituted with image
    paths and must print one decimal number on stdout.
    """

    name: str
    command: str

    def __post_init__(self):
        if "{a}" not in self.command or "{b}" not in self.command:
            raise MetricError("external metric command must contain {a} and {b}")

    def run(self, a_path: str, b_path: str) -> float:
        argv = [
            tok.replace("{a}", str(a_path)).replace("{b}", str(b_path))
            for tok in shlex.split(self.command)
        ]
        proc = subprocess.run(argv, capture_output=True, text=True)
        if proc.returncode != 0:
            raise MetricError(
                f"external metric {self.name!r} exited {proc.returncode}; "
                f"stderr: {proc.stderr.strip()}"
            )
        try:
            return float(proc.stdout.strip().split()[-1])
        except (ValueError, IndexError):
            raise MetricError(
                f"external metric {self.name!r} printed no number: {proc.stdout!r}"
            )
