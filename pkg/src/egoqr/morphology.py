"""Grayscale flat morphology with edge replication at the borders."""

from __future__ import annotations

import numpy as np

from .imaging import GrayImage, StructuringElement


def _shifted_stack(img: GrayImage, k: StructuringElement, sign: int) -> np.ndarray:
    h, w = img.shape
    hh, hw = k.height // 2, k.width // 2
    padded = np.pad(img.pixels, ((hh, hh), (hw, hw)), mode="edge")
    views = [
        padded[hh + sign * dy : hh + sign * dy + h, hw + sign * dx : hw + sign * dx + w]
        for dy, dx in k.offsets()
    ]
    return np.stack(views, axis=0)


def dilate(img: GrayImage, k: StructuringElement | None = None) -> GrayImage:
    """Local maximum over the reflected neighborhood of k."""
    k = k or StructuringElement.square(3)
    return GrayImage(_shifted_stack(img, k, sign=-1).max(axis=0))


def erode(img: GrayImage, k: StructuringElement | None = None) -> GrayImage:
    """Local minimum over the neighborhood of k."""
    k = k or StructuringElement.square(3)
    return GrayImage(_shifted_stack(img, k, sign=+1).min(axis=0))
