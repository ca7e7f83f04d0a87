"""Global Otsu thresholding and contrast-limited adaptive histogram equalization."""

from __future__ import annotations

import numpy as np

from .imaging import GrayImage, round_half_away


def otsu_threshold(img: GrayImage) -> int:
    """Threshold minimizing the intensity-weighted intra-class variance.

    Scans t in [0, 254] with class 1 = {pixels <= t}; ties resolve to the
    smallest t. A single-valued image returns that value (degenerate case).
    """
    hist = np.bincount(img.pixels.ravel(), minlength=256).astype(np.float64)
    nonzero = np.flatnonzero(hist)
    if nonzero.size == 1:
        return int(nonzero[0])
    total = hist.sum()
    levels = np.arange(256, dtype=np.float64)
    c1_n = np.cumsum(hist)[:255]
    c1_sum = np.cumsum(hist * levels)[:255]
    c1_sumsq = np.cumsum(hist * levels * levels)[:255]
    c2_n = total - c1_n
    c2_sum = c1_sum[-1] + hist[255] * 255.0 - c1_sum
    c2_sumsq = c1_sumsq[-1] + hist[255] * 255.0 * 255.0 - c1_sumsq
    with np.errstate(divide="ignore", invalid="ignore"):
        var1 = np.where(c1_n > 0, c1_sumsq / c1_n - (c1_sum / c1_n) ** 2, 0.0)
        var2 = np.where(c2_n > 0, c2_sumsq / c2_n - (c2_sum / c2_n) ** 2, 0.0)
    var1 = np.maximum(var1, 0.0)
    var2 = np.maximum(var2, 0.0)
    sigma_w = (c1_n * var1 + c2_n * var2) / total
    return int(np.argmin(sigma_w))


def is_degenerate(img: GrayImage) -> bool:
    """True when the image holds a single intensity (no usable threshold)."""
    p = img.pixels
    return bool((p == p.flat[0]).all())


def binarize_otsu(img: GrayImage) -> GrayImage:
    """Map pixels <= Otsu threshold to 0 and the rest to 255.

    Degenerate (constant) images binarize to all-0: every pixel compares <= t.
    """
    t = otsu_threshold(img)
    return GrayImage(np.where(img.pixels <= t, 0, 255).astype(np.uint8))


def _clip_histogram(hist: np.ndarray, clip: int) -> np.ndarray:
    """Clip bins at `clip` and put the excess back without re-exceeding it.

    Uniform shares first, then single counts round-robin from bin 0 into bins
    still below the limit. Total mass is preserved and every bin ends <= clip.
    """
    hist = hist.astype(np.int64)
    excess = int(np.maximum(hist - clip, 0).sum())
    hist = np.minimum(hist, clip)
    while excess > 0:
        room = clip - hist
        open_bins = np.flatnonzero(room > 0)
        if open_bins.size == 0:
            break  # unreachable for clip >= ceil(npix/256): capacity covers the mass
        share = excess // hist.size
        if share > 0:
            add = np.minimum(room, share)
            hist += add
            excess -= int(add.sum())
        else:
            take = open_bins[:excess]
            hist[take] += 1
            excess -= take.size
    return hist


def _tile_edges(length: int, count: int) -> np.ndarray:
    return np.rint(np.arange(count + 1) * (length / count)).astype(np.int64)


def clahe(img: GrayImage, clip_limit: float, tile_grid: tuple[int, int] = (8, 8)) -> GrayImage:
    """Contrast-limited adaptive histogram equalization.

    Per tile: 256-bin histogram, bins clipped at clip_limit * tile_pixels / 256
    (rounded up, floor 1) with clipped mass redistributed, then an equalization
    LUT v -> round(cdf(v) * 255 / tile_pixels). Each output pixel bilinearly
    blends the LUTs of the four surrounding tile centers; border pixels clamp
    to the edge tiles.
    """
    if clip_limit < 1.0:
        raise ValueError("clip_limit must be >= 1.0")
    rows, cols = tile_grid
    if rows < 1 or cols < 1:
        raise ValueError("tile grid must be at least 1x1")
    h, w = img.shape
    ys = _tile_edges(h, rows)
    xs = _tile_edges(w, cols)
    if np.diff(ys).min() < 2 or np.diff(xs).min() < 2:
        raise ValueError(f"tile grid {rows}x{cols} yields tiles smaller than 2x2")

    luts = np.empty((rows, cols, 256), dtype=np.float64)
    for r in range(rows):
        for c in range(cols):
            tile = img.pixels[ys[r] : ys[r + 1], xs[c] : xs[c + 1]]
            npix = tile.size
            clip = max(1, -(-int(clip_limit * npix) // 256))  # ceil
            hist = _clip_histogram(np.bincount(tile.ravel(), minlength=256), clip)
            cdf = np.cumsum(hist)
            luts[r, c] = round_half_away(cdf * (255.0 / npix))

    cy = (ys[:-1] + ys[1:] - 1) / 2.0
    cx = (xs[:-1] + xs[1:] - 1) / 2.0
    ri, wy = _blend_coords(np.arange(h), cy)
    ci, wx = _blend_coords(np.arange(w), cx)
    pix = img.pixels
    tl = luts[ri[:, None], ci[None, :], pix]
    tr = luts[ri[:, None], np.minimum(ci + 1, cols - 1)[None, :], pix]
    bl = luts[np.minimum(ri + 1, rows - 1)[:, None], ci[None, :], pix]
    br = luts[np.minimum(ri + 1, rows - 1)[:, None], np.minimum(ci + 1, cols - 1)[None, :], pix]
    wy = wy[:, None]
    wx = wx[None, :]
    out = (tl * (1 - wy) * (1 - wx) + tr * (1 - wy) * wx + bl * wy * (1 - wx) + br * wy * wx)
    return GrayImage.from_float(out)


def _blend_coords(coords: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Left tile index and fractional weight toward the right tile, clamped at edges."""
    if centers.size == 1:
        return np.zeros(coords.size, dtype=np.int64), np.zeros(coords.size)
    idx = np.clip(np.searchsorted(centers, coords, side="right") - 1, 0, centers.size - 2)
    span = centers[idx + 1] - centers[idx]
    weight = np.clip((coords - centers[idx]) / span, 0.0, 1.0)
    return idx, weight


def clahe_binarize(img: GrayImage, clip_limit: float, tile_grid: tuple[int, int] = (8, 8)) -> GrayImage:
    """CLAHE followed by global Otsu binarization (images too small to tile fall back)."""
    h, w = img.shape
    rows, cols = tile_grid
    while (rows > 1 or cols > 1) and (h / rows < 2 or w / cols < 2):
        rows = max(1, rows // 2)
        cols = max(1, cols // 2)
    if h < 2 or w < 2:
        return binarize_otsu(img)
    return binarize_otsu(clahe(img, clip_limit, (rows, cols)))
