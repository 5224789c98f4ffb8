"""Pluggable restorers: synthetic built-ins plus an external-process protocol.

Real model checkpoints are reached through the `external` kind, which
writes the input as PNG, substitutes `{in}`/`{out}` in a command
template, runs it, and reads the output PNG back. Synthetic restorers
(identity, gamma, box blur) exist for testing the pipeline machinery.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
from dataclasses import dataclass

import numpy as np

from .errors import RestorerError
from .geometry import Restorer
from .image import ImageBuffer, load_png, save_png

KINDS = ("identity", "gamma", "box_blur", "external")


@dataclass(frozen=True)
class RestorerSpec:
    kind: str
    label: str = ""
    gamma: float = 1.0
    radius: int = 1
    command: str = ""
    workdir: str = "."
    timeout: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RestorerError(f"unknown restorer kind {self.kind!r}")
        if self.kind == "gamma" and not self.gamma > 0:
            raise RestorerError(f"gamma must be > 0, got {self.gamma}")
        if self.kind == "box_blur" and self.radius < 1:
            raise RestorerError(f"box_blur radius must be >= 1, got {self.radius}")
        if self.kind == "external":
            if "{in}" not in self.command or "{out}" not in self.command:
                raise RestorerError(
                    "external command template must contain both {in} and {out}"
                )


def parse_restorer_spec(text: str, label: str = "", workdir: str = ".") -> RestorerSpec:
    """Parse CLI shorthand: identity | gamma:G | box_blur:R | external:COMMAND."""
    kind, _, arg = text.partition(":")
    kind = kind.strip()
    if kind == "identity":
        return RestorerSpec("identity", label=label or "identity")
    if kind == "gamma":
        return RestorerSpec("gamma", label=label or text, gamma=float(arg))
    if kind in ("box_blur", "blur"):
        return RestorerSpec("box_blur", label=label or text, radius=int(arg))
    if kind == "external":
        return RestorerSpec("external", label=label or "external", command=arg,
                            workdir=workdir)
    raise RestorerError(f"cannot parse restorer spec {text!r}")


def _box_blur(data: np.ndarray, radius: int) -> np.ndarray:
    """Mean over the (2r+1)^2 neighborhood with clamp-to-edge borders."""
    k = 2 * radius + 1
    h, w = data.shape[:2]
    padded = np.pad(data, ((radius, radius), (radius, radius), (0, 0)), mode="edge")
    acc = np.zeros_like(data)
    for dy in range(k):
        for dx in range(k):
            acc += padded[dy:dy + h, dx:dx + w, :]
    return acc / (k * k)


def _run_external(spec: RestorerSpec, img: ImageBuffer) -> ImageBuffer:
    os.makedirs(spec.workdir, exist_ok=True)
    with tempfile.TemporaryDirectory(prefix="restore_", dir=spec.workdir) as tmp:
        in_path = os.path.join(tmp, "in.png")
        out_path = os.path.join(tmp, "out.png")
        save_png(img, in_path)
        argv = [
            tok.replace("{in}", in_path).replace("{out}", out_path)
            for tok in shlex.split(spec.command)
        ]
        proc = subprocess.run(
            argv, capture_output=True, text=True, timeout=spec.timeout
        )
        if proc.returncode != 0:
            raise RestorerError(
                f"external restorer {spec.label!r} exited {proc.returncode}; "
                f"command: {' '.join(argv)}; stderr: {proc.stderr.strip()}"
            )
        if not os.path.isfile(out_path):
            raise RestorerError(
                f"external restorer {spec.label!r} produced no output file; "
                f"stderr: {proc.stderr.strip()}"
            )
        result = load_png(out_path)
    if (result.width, result.height, result.channels) != (
        img.width, img.height, img.channels
    ):
        raise RestorerError(
            f"external restorer {spec.label!r} changed dimensions: "
            f"{img.width}x{img.height}x{img.channels} -> "
            f"{result.width}x{result.height}x{result.channels}"
        )
    return result


def restore(spec: RestorerSpec, img: ImageBuffer) -> ImageBuffer:
    if spec.kind == "identity":
        return img
    if spec.kind == "gamma":
        return ImageBuffer(np.power(img.data, spec.gamma))
    if spec.kind == "box_blur":
        return ImageBuffer(_box_blur(img.data, spec.radius))
    return _run_external(spec, img)


def as_function(spec: RestorerSpec) -> Restorer:
    """Bind a spec into the plain image -> image callable the wrappers take."""
    return lambda img: restore(spec, img)
