"""Core raster and geometry types plus the pixel primitives used by every stage.

All intensities are 8-bit grayscale. Fractional intensities produced by
interpolation are rounded half away from zero; images are immutable value
objects safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class PgmError(ValueError):
    """Raised for malformed, truncated or unsupported PGM payloads."""


def round_half_away(values: np.ndarray | float) -> np.ndarray | float:
    """Round to nearest integer, halves away from zero (0.5 -> 1, -0.5 -> -1)."""
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def _as_u8(values: np.ndarray) -> np.ndarray:
    return np.clip(round_half_away(values), 0, 255).astype(np.uint8)


@dataclass(frozen=True)
class GrayImage:
    """Immutable 8-bit single-channel raster, row-major."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.pixels)
        if arr.ndim != 2:
            raise ValueError(f"expected 2-D pixel array, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if arr.dtype != np.uint8:
            if not np.issubdtype(arr.dtype, np.integer):
                raise ValueError(f"pixel dtype must be integer, got {arr.dtype}")
            if arr.min() < 0 or arr.max() > 255:
                raise ValueError("intensities must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        arr = arr.copy() if arr is self.pixels else arr
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @classmethod
    def full(cls, width: int, height: int, value: int) -> "GrayImage":
        return cls(np.full((height, width), value, dtype=np.uint8))

    @classmethod
    def from_float(cls, values: np.ndarray) -> "GrayImage":
        """Build an image from float data, rounding half away from zero and clamping."""
        return cls(_as_u8(np.asarray(values, dtype=np.float64)))

    def astype_float(self) -> np.ndarray:
        return self.pixels.astype(np.float64)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    def __hash__(self) -> int:
        return hash((self.pixels.shape, self.pixels.tobytes()))


@dataclass(frozen=True, order=True)
class BoundingBox:
    """Inclusive pixel-space box: both corners are part of the box."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self) -> None:
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"degenerate box {self}")

    @property
    def width(self) -> int:
        return self.x_max - self.x_min + 1

    @property
    def height(self) -> int:
        return self.y_max - self.y_min + 1

    @property
    def area(self) -> int:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    def contains_point(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    def intersection(self, other: "BoundingBox") -> "BoundingBox | None":
        x0 = max(self.x_min, other.x_min)
        y0 = max(self.y_min, other.y_min)
        x1 = min(self.x_max, other.x_max)
        y1 = min(self.y_max, other.y_max)
        if x0 > x1 or y0 > y1:
            return None
        return BoundingBox(x0, y0, x1, y1)

    def iou(self, other: "BoundingBox") -> float:
        inter = self.intersection(other)
        if inter is None:
            return 0.0
        union = self.area + other.area - inter.area
        return inter.area / union

    def clamped(self, width: int, height: int) -> "BoundingBox | None":
        """Clip to an image of the given size; None when fully outside."""
        x0 = max(self.x_min, 0)
        y0 = max(self.y_min, 0)
        x1 = min(self.x_max, width - 1)
        y1 = min(self.y_max, height - 1)
        if x0 > x1 or y0 > y1:
            return None
        return BoundingBox(x0, y0, x1, y1)

    def scaled(self, sx: float, sy: float) -> "BoundingBox":
        return BoundingBox(
            int(math.floor(self.x_min * sx)),
            int(math.floor(self.y_min * sy)),
            int(math.ceil((self.x_max + 1) * sx)) - 1,
            int(math.ceil((self.y_max + 1) * sy)) - 1,
        )


@dataclass(frozen=True)
class Ray:
    """Half-line from an origin along a unit direction, both in pixel space."""

    origin: tuple[float, float]
    direction: tuple[float, float]

    def __post_init__(self) -> None:
        dx, dy = self.direction
        norm = math.hypot(dx, dy)
        if norm == 0.0:
            raise ValueError("ray direction must be nonzero")
        if abs(norm - 1.0) > 1e-6:
            object.__setattr__(self, "direction", (dx / norm, dy / norm))

    @classmethod
    def from_points(cls, origin: tuple[float, float], through: tuple[float, float]) -> "Ray":
        return cls(origin, (through[0] - origin[0], through[1] - origin[1]))


@dataclass(frozen=True)
class StructuringElement:
    """Flat neighborhood mask with the anchor at its center."""

    width: int
    height: int
    mask: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1 or self.width % 2 == 0 or self.height % 2 == 0:
            raise ValueError("structuring element sides must be odd and >= 1")
        mask = self.mask
        if mask is None:
            mask = np.ones((self.height, self.width), dtype=bool)
        else:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != (self.height, self.width):
                raise ValueError("mask shape must match (height, width)")
            if not mask.any():
                raise ValueError("structuring element needs at least one member")
        mask = mask.copy()
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def square(cls, size: int = 3) -> "StructuringElement":
        return cls(size, size)

    def offsets(self) -> np.ndarray:
        """Member offsets (dy, dx) relative to the center anchor."""
        ys, xs = np.nonzero(self.mask)
        return np.stack([ys - self.height // 2, xs - self.width // 2], axis=1)

    def reflected(self) -> "StructuringElement":
        return StructuringElement(self.width, self.height, self.mask[::-1, ::-1])

    @property
    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.mask, self.mask[::-1, ::-1]))


# --------------------------------------------------------------------------
# PGM I/O (binary P5, maxval 255, bit-exact)
# --------------------------------------------------------------------------

def _read_pgm_tokens(data: bytes, count: int, start: int) -> tuple[list[int], int]:
    """Read whitespace-separated integer tokens, honoring '#' comments."""
    tokens: list[int] = []
    i = start
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i] == ord("#"):
            while i < n and data[i] not in (0x0A, 0x0D):
                i += 1
            continue
        j = i
        while j < n and not data[j : j + 1].isspace():
            j += 1
        if j == i:
            raise PgmError("malformed PGM header: missing token")
        tok = data[i:j]
        if not tok.isdigit():
            raise PgmError(f"malformed PGM header token {tok!r}")
        tokens.append(int(tok))
        i = j
    return tokens, i


def load_pgm(data: bytes) -> GrayImage:
    """Parse a binary PGM (P5, maxval 255) byte string."""
    if len(data) < 2:
        raise PgmError("truncated PGM: no magic")
    magic = data[:2]
    if magic == b"P2":
        raise PgmError("unsupported PGM format: ASCII 'P2' (only binary 'P5' accepted)")
    if magic != b"P5":
        raise PgmError(f"malformed PGM: unknown magic {magic!r}")
    (width, height, maxval), pos = _read_pgm_tokens(data, 3, 2)
    if width < 1 or height < 1:
        raise PgmError(f"malformed PGM dimensions {width}x{height}")
    if maxval != 255:
        raise PgmError(f"unsupported PGM maxval {maxval} (must be 255)")
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise PgmError("malformed PGM header: missing whitespace before raster")
    pos += 1  # exactly one whitespace byte separates header from raster
    expected = width * height
    raster = data[pos : pos + expected]
    if len(raster) < expected:
        raise PgmError(f"truncated PGM payload: need {expected} bytes, got {len(raster)}")
    if len(data) - pos > expected:
        raise PgmError("malformed PGM: trailing bytes after raster")
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return GrayImage(pixels)


def save_pgm(img: GrayImage) -> bytes:
    """Serialize to canonical binary PGM: 'P5\\n<w> <h>\\n255\\n' + raw rows."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


# --------------------------------------------------------------------------
# Pixel primitives
# --------------------------------------------------------------------------

def invert(img: GrayImage) -> GrayImage:
    """Per-pixel intensity inversion, out = 255 - in."""
    return GrayImage(255 - img.pixels)


def resize(img: GrayImage, new_w: int, new_h: int) -> GrayImage:
    """Bilinear resize with corner-aligned sampling.

    Output extrema never exceed the input's global [min, max] envelope.
    """
    if new_w < 1 or new_h < 1:
        raise ValueError(f"target dimensions must be >= 1, got {new_w}x{new_h}")
    h, w = img.shape
    if (new_w, new_h) == (w, h):
        return img
    src_x = np.zeros(new_w) if new_w == 1 else np.arange(new_w) * ((w - 1) / (new_w - 1))
    src_y = np.zeros(new_h) if new_h == 1 else np.arange(new_h) * ((h - 1) / (new_h - 1))
    x0 = np.minimum(src_x.astype(np.int64), max(w - 2, 0))
    y0 = np.minimum(src_y.astype(np.int64), max(h - 2, 0))
    fx = src_x - x0
    fy = src_y - y0
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    p = img.astype_float()
    top = p[np.ix_(y0, x0)] * (1 - fx) + p[np.ix_(y0, x1)] * fx
    bot = p[np.ix_(y1, x0)] * (1 - fx) + p[np.ix_(y1, x1)] * fx
    out = top * (1 - fy)[:, None] + bot * fy[:, None]
    return GrayImage(_as_u8(out))


def crop_with_margin(
    img: GrayImage, box: BoundingBox, margin_frac: float = 0.125, min_pad: int = 8
) -> tuple[GrayImage, BoundingBox]:
    """Extract the box plus a margin, clamped to image bounds.

    The pad is margin_frac of the larger box side (rounded half up), but at
    least min_pad pixels. Returns the patch and the source box actually used.
    """
    inside = box.clamped(img.width, img.height)
    if inside is None:
        raise ValueError("box lies fully outside the image")
    pad = max(int(math.floor(margin_frac * max(inside.width, inside.height) + 0.5)), min_pad)
    padded = BoundingBox(
        inside.x_min - pad, inside.y_min - pad, inside.x_max + pad, inside.y_max + pad
    )
    actual = padded.clamped(img.width, img.height)
    assert actual is not None
    patch = img.pixels[actual.y_min : actual.y_max + 1, actual.x_min : actual.x_max + 1]
    return GrayImage(patch), actual


def intersect_ray_box(ray: Ray, box: BoundingBox) -> float | None:
    """Smallest nonnegative t with origin + t*direction inside the box (slab method).

    Box edges are inclusive; an origin inside the box yields t = 0.
    """
    ox, oy = ray.origin
    dx, dy = ray.direction
    t_low, t_high = -math.inf, math.inf
    for o, d, lo, hi in ((ox, dx, box.x_min, box.x_max), (oy, dy, box.y_min, box.y_max)):
        if d == 0.0:
            if not (lo <= o <= hi):
                return None
            continue
        t1, t2 = (lo - o) / d, (hi - o) / d
        if t1 > t2:
            t1, t2 = t2, t1
        t_low = max(t_low, t1)
        t_high = min(t_high, t2)
    if t_low > t_high or t_high < 0.0:
        return None
    return max(t_low, 0.0)
