"""Rasterize symbols to images and sample module grids back out of images."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..homography import DegenerateGeometryError, unit_square_to_quad, apply_homography
from ..imaging import GrayImage
from .decoder import BitMatrix
from .encoder import QrSymbol

Binarizer = Callable[[GrayImage], GrayImage]


def render(sym: QrSymbol, module_px: int = 4, quiet_zone: int = 4) -> GrayImage:
    """Draw a symbol: dark modules at 0, light at 255, exact module_px blocks."""
    if module_px < 1:
        raise ValueError("module_px must be >= 1")
    if quiet_zone < 0:
        raise ValueError("quiet_zone must be >= 0")
    grid = np.pad(sym.modules, quiet_zone, mode="constant", constant_values=False)
    img = np.where(grid, 0, 255).astype(np.uint8)
    img = np.repeat(np.repeat(img, module_px, axis=0), module_px, axis=1)
    return GrayImage(img)


def symbol_corners(sym: QrSymbol, module_px: int = 4, quiet_zone: int = 4) -> np.ndarray:
    """TL,TR,BR,BL pixel corners of the symbol region inside its rendering."""
    off = quiet_zone * module_px
    extent = sym.side * module_px
    return np.array(
        [[off, off], [off + extent, off], [off + extent, off + extent], [off, off + extent]],
        dtype=np.float64,
    )


def identity_binarizer(img: GrayImage) -> GrayImage:
    """Pass-through for images that are already binary {0, 255}."""
    return img


def sample_grid(
    img: GrayImage,
    corners: np.ndarray,
    side: int,
    binarizer: Binarizer,
) -> BitMatrix:
    """Sample a side x side module grid from the quad spanned by the corners.

    Corners are TL,TR,BR,BL in pixel space. A homography maps unit module
    coordinates onto the image and each module center is read from the
    binarized image, dark (< 128) as True. Centers of modules wider than a
    few pixels are read as a majority over a one-pixel cross, which cancels
    isolated binarization noise without ever leaving the module.
    """
    if side < 21:
        raise ValueError("side must be >= 21 modules")
    quad = np.asarray(corners, dtype=np.float64)
    h = unit_square_to_quad(quad)
    centers = (np.arange(side) + 0.5) / side
    u, v = np.meshgrid(centers, centers)
    pts = np.stack([u.ravel(), v.ravel()], axis=1)
    mapped = apply_homography(h, pts)
    binary = binarizer(img)
    xs = np.clip(np.floor(mapped[:, 0]).astype(np.int64), 0, img.width - 1)
    ys = np.clip(np.floor(mapped[:, 1]).astype(np.int64), 0, img.height - 1)
    dark_px = binary.pixels < 128
    module_px = (
        np.linalg.norm(quad[1] - quad[0]) + np.linalg.norm(quad[3] - quad[0])
    ) / (2.0 * side)
    if module_px >= 4.0:
        votes = np.zeros(xs.size, dtype=np.int64)
        for dx, dy in ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)):
            vx = np.clip(xs + dx, 0, img.width - 1)
            vy = np.clip(ys + dy, 0, img.height - 1)
            votes += dark_px[vy, vx]
        dark = votes >= 3
    else:
        dark = dark_px[ys, xs]
    return BitMatrix(side=side, bits=dark.reshape(side, side))


__all__ = [
    "Binarizer",
    "DegenerateGeometryError",
    "identity_binarizer",
    "render",
    "sample_grid",
    "symbol_corners",
]
