"""Pluggable x2 patch upscaling with a deterministic sharpening default.

A learned model can be dropped in through the subprocess contract: PGM on
stdin, x2 PGM on stdout, nonzero exit signals failure.
"""

from __future__ import annotations

import subprocess
from dataclasses import dataclass

import numpy as np

from .imaging import GrayImage, load_pgm, resize, save_pgm


class SuperResolverError(RuntimeError):
    """The resolver failed or returned an image violating the x2 contract."""


def box_blur3(img: GrayImage) -> np.ndarray:
    """3x3 box mean with edge replication, returned as float64."""
    padded = np.pad(img.astype_float(), 1, mode="edge")
    h, w = img.shape
    acc = np.zeros((h, w))
    for dy in range(3):
        for dx in range(3):
            acc += padded[dy : dy + h, dx : dx + w]
    return acc / 9.0


@dataclass(frozen=True)
class SharpenUpscaleResolver:
    """Bilinear x2 upscale followed by unsharp masking (3x3 box, amount 1.0)."""

    name: str = "bilinear-unsharp-x2"
    scale_factor: int = 2

    def upscale(self, img: GrayImage) -> GrayImage:
        up = resize(img, img.width * self.scale_factor, img.height * self.scale_factor)
        sharp = 2.0 * up.astype_float() - box_blur3(up)
        return GrayImage.from_float(sharp)


@dataclass(frozen=True)
class SubprocessSuperResolver:
    """Adapter for an external resolver executable speaking PGM on stdio."""

    command: str
    name: str = "external"
    scale_factor: int = 2

    def upscale(self, img: GrayImage) -> GrayImage:
        try:
            proc = subprocess.run(
                [self.command],
                input=save_pgm(img),
                capture_output=True,
                timeout=30,
                check=False,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise SuperResolverError(f"resolver {self.command!r} failed to run: {exc}") from exc
        if proc.returncode != 0:
            raise SuperResolverError(
                f"resolver {self.command!r} exited {proc.returncode}"
            )
        try:
            out = load_pgm(proc.stdout)
        except ValueError as exc:
            raise SuperResolverError(f"resolver output is not a valid PGM: {exc}") from exc
        want = (img.width * self.scale_factor, img.height * self.scale_factor)
        if (out.width, out.height) != want:
            raise SuperResolverError(
                f"resolver output {out.width}x{out.height}, expected {want[0]}x{want[1]}"
            )
        return out


def default_super_resolver() -> SharpenUpscaleResolver:
    return SharpenUpscaleResolver()
