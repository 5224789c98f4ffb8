"""Report figures: per-pair metric bars rendered next to the CSV/JSON output."""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import MetricReport


def render_report_figure(
    report: MetricReport,
    path: str | os.PathLike,
    baseline: MetricReport | None = None,
    title: str = "Evaluation report",
) -> None:
    """Two-panel bar chart (PSNR-Y / SSIM-Y per pair) with mean lines.

    Infinite PSNR entries are drawn at the finite maximum and marked.
    An optional baseline report is overlaid as hollow bars.
    """
    ids = [e.pair_id for e in report.entries]
    x = np.arange(len(ids))

    def finite_bars(values):
        finite = [v for v in values if math.isfinite(v)]
        cap = max(finite) if finite else 1.0
        heights = [v if math.isfinite(v) else cap for v in values]
        inf_mask = [not math.isfinite(v) for v in values]
        return heights, inf_mask

    fig, (ax_psnr, ax_ssim) = plt.subplots(2, 1, figsize=(max(6, 0.5 * len(ids) + 3), 7))

    psnr_vals = [e.psnr_y for e in report.entries]
    heights, inf_mask = finite_bars(psnr_vals)
    ax_psnr.bar(x, heights, color="#4878b0", label="restored")
    for xi, is_inf in zip(x, inf_mask):
        if is_inf:
            ax_psnr.annotate("inf", (xi, heights[xi]), ha="center", va="bottom", fontsize=8)
    if baseline is not None:
        base_heights, _ = finite_bars([e.psnr_y for e in baseline.entries])
        ax_psnr.bar(x, base_heights, fill=False, edgecolor="#c44e52", label="input")
        ax_psnr.legend(fontsize=8)
    if math.isfinite(report.means.get("psnr_y", math.inf)):
        ax_psnr.axhline(report.means["psnr_y"], color="k", lw=0.8, ls="--")
    ax_psnr.set_ylabel("PSNR-Y (dB)")
    ax_psnr.set_title(title)
    ax_psnr.set_xticks(x)
    ax_psnr.set_xticklabels(ids, rotation=45, ha="right", fontsize=7)

    ssim_vals = [e.ssim_y for e in report.entries]
    ax_ssim.bar(x, ssim_vals, color="#6acc64", label="restored")
    if baseline is not None:
        ax_ssim.bar(x, [e.ssim_y for e in baseline.entries], fill=False,
                    edgecolor="#c44e52", label="input")
        ax_ssim.legend(fontsize=8)
    ax_ssim.axhline(report.means["ssim_y"], color="k", lw=0.8, ls="--")
    ax_ssim.set_ylabel("SSIM-Y")
    ax_ssim.set_ylim(0.0, 1.05)
    ax_ssim.set_xticks(x)
    ax_ssim.set_xticklabels(ids, rotation=45, ha="right", fontsize=7)

    fig.tight_layout()
    fig.savefig(os.fspath(path), dpi=120)
    plt.close(fig)
