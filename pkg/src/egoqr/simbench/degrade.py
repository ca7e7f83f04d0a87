"""Synthetic scene generation with egocentric-style degradations.

Each code is rendered cleanly, then pushed through the degradation chain in a
fixed order: perspective warp (tilt + in-plane rotation + size), gaussian
blur, motion blur, resolution loss (down-up resampling), additive noise, and
a multiplicative illumination gradient. Noise is the only consumer of the
scene RNG, so everything else is reproducible from the spec alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy import ndimage

from ..codec import encode, render
from ..homography import fit_homography, invert_homography
from ..imaging import BoundingBox, GrayImage, resize

_CAMERA_DISTANCE = 2.5  # in symbol-side units; controls perspective strength


@dataclass(frozen=True)
class DegradationSpec:
    """Degradation knobs plus the render controls that fix code size."""

    perspective_tilt: float = 0.0  # degrees about the vertical axis
    rotation: float = 0.0  # degrees in-plane
    motion_blur: tuple[float, float] = (0.0, 0.0)  # (length px, angle degrees)
    gaussian_blur: float = 0.0  # sigma in px
    downscale: float = 1.0  # resolution-loss ratio in (0, 1]
    noise_sigma: float = 0.0
    illumination_gradient: tuple[str, float] = ("x", 0.0)  # (axis, strength ratio)
    background: str = "flat"  # "flat" or "texture"
    background_level: int = 235
    background_seed: int = 0
    module_px: int = 4
    quiet_modules: int = 4
    ec_level: str = "M"
    target_px: int | None = None  # symbol side on canvas; None keeps render size

    def __post_init__(self) -> None:
        if self.motion_blur[0] < 0 or self.gaussian_blur < 0 or self.noise_sigma < 0:
            raise ValueError("degradation magnitudes must be >= 0")
        if not 0.0 < self.downscale <= 1.0:
            raise ValueError("downscale ratio must be in (0, 1]")
        if self.illumination_gradient[0] not in ("x", "y"):
            raise ValueError("illumination axis must be 'x' or 'y'")
        if self.illumination_gradient[1] < 0:
            raise ValueError("illumination strength must be >= 0")
        if self.background not in ("flat", "texture"):
            raise ValueError("background must be 'flat' or 'texture'")
        if self.module_px < 1 or self.quiet_modules < 0:
            raise ValueError("invalid render controls")
        if self.target_px is not None and self.target_px < 21:
            raise ValueError("target_px must cover at least one module per side")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["motion_blur"] = list(self.motion_blur)
        d["illumination_gradient"] = list(self.illumination_gradient)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DegradationSpec":
        d = dict(d)
        if "motion_blur" in d:
            d["motion_blur"] = tuple(d["motion_blur"])
        if "illumination_gradient" in d:
            d["illumination_gradient"] = tuple(d["illumination_gradient"])
        return cls(**d)


@dataclass(frozen=True)
class GroundTruth:
    payload: bytes
    box: BoundingBox


def _project_corners(points: np.ndarray, tilt_deg: float, rot_deg: float, scale: float) -> np.ndarray:
    """Rotate in-plane, tilt out-of-plane, pinhole-project, scale to pixels.

    Points are in symbol units (symbol spans [-0.5, 0.5] per side).
    """
    rot = math.radians(rot_deg)
    tilt = math.radians(tilt_deg)
    cos_r, sin_r = math.cos(rot), math.sin(rot)
    x = points[:, 0] * cos_r - points[:, 1] * sin_r
    y = points[:, 0] * sin_r + points[:, 1] * cos_r
    xt = x * math.cos(tilt)
    z = x * math.sin(tilt)
    w = _CAMERA_DISTANCE / (_CAMERA_DISTANCE + z)
    return np.stack([xt * w, y * w], axis=1) * scale


def _warp_patch(base: GrayImage, spec: DegradationSpec, symbol_px: int, quiet_px: int
                ) -> tuple[GrayImage, np.ndarray]:
    """Perspective-warp the rendered patch; returns (patch, symbol corner px)."""
    w = base.width
    target = float(spec.target_px if spec.target_px is not None else symbol_px)
    half_patch = w / (2.0 * symbol_px)
    patch_units = np.array(
        [[-half_patch, -half_patch], [half_patch, -half_patch],
         [half_patch, half_patch], [-half_patch, half_patch]]
    )
    sym_units = np.array([[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]])
    if spec.perspective_tilt == 0.0 and spec.rotation == 0.0 and spec.target_px is None:
        q = float(quiet_px)  # identity warp: keep the render bit-exact
        return base, np.array([[q, q], [w - q, q], [w - q, w - q], [q, w - q]])

    dst_patch = _project_corners(patch_units, spec.perspective_tilt, spec.rotation, target)
    dst_sym = _project_corners(sym_units, spec.perspective_tilt, spec.rotation, target)
    offset = dst_patch.min(axis=0)
    dst_patch -= offset
    dst_sym -= offset
    out_w = int(math.ceil(dst_patch[:, 0].max()))
    out_h = int(math.ceil(dst_patch[:, 1].max()))

    src_patch = np.array([[0.0, 0.0], [w, 0.0], [w, w], [0.0, w]])
    h_inv = invert_homography(fit_homography(src_patch, dst_patch))
    ys, xs = np.mgrid[0:out_h, 0:out_w]
    pts = np.stack([xs.ravel() + 0.5, ys.ravel() + 0.5, np.ones(xs.size)], axis=0)
    mapped = h_inv @ pts
    mx = mapped[0] / mapped[2] - 0.5
    my = mapped[1] / mapped[2] - 0.5
    x0 = np.floor(mx).astype(np.int64)
    y0 = np.floor(my).astype(np.int64)
    fx = mx - x0
    fy = my - y0
    src = base.astype_float()
    minification = symbol_px / target
    if minification > 1.2:
        # Pre-filter before point sampling, mimicking sensor-area integration.
        src = ndimage.gaussian_filter(src, 0.45 * minification, mode="nearest")
    padded = np.pad(src, 1, mode="constant", constant_values=255.0)
    x0c = np.clip(x0 + 1, 0, w)
    y0c = np.clip(y0 + 1, 0, w)
    x1c = np.clip(x0 + 2, 0, w + 1)
    y1c = np.clip(y0 + 2, 0, w + 1)
    outside = (mx < -1) | (my < -1) | (mx > w) | (my > w)
    top = padded[y0c, x0c] * (1 - fx) + padded[y0c, x1c] * fx
    bot = padded[y1c, x0c] * (1 - fx) + padded[y1c, x1c] * fx
    vals = top * (1 - fy) + bot * fy
    vals[outside] = 255.0
    patch = GrayImage.from_float(vals.reshape(out_h, out_w))
    return patch, dst_sym


def _motion_kernel(length: float, angle_deg: float) -> np.ndarray | None:
    if length < 2.0:
        return None
    n = int(math.ceil(length))
    if n % 2 == 0:
        n += 1
    kernel = np.zeros((n, n))
    angle = math.radians(angle_deg)
    cx = n // 2
    steps = 4 * n
    for i in range(steps + 1):
        t = (i / steps - 0.5) * (length - 1)
        x = cx + t * math.cos(angle)
        y = cx + t * math.sin(angle)
        xi, yi = int(round(x)), int(round(y))
        if 0 <= xi < n and 0 <= yi < n:
            kernel[yi, xi] += 1.0
    total = kernel.sum()
    if total == 0:
        return None
    return kernel / total


def degrade_patch(base: GrayImage, spec: DegradationSpec, symbol_px: int, quiet_px: int,
                  rng: np.random.Generator) -> tuple[GrayImage, np.ndarray]:
    """Apply the full degradation chain to one rendered code patch."""
    patch, sym_corners = _warp_patch(base, spec, symbol_px, quiet_px)
    arr = patch.astype_float()
    if spec.gaussian_blur > 0:
        arr = ndimage.gaussian_filter(arr, spec.gaussian_blur, mode="nearest")
    kernel = _motion_kernel(*spec.motion_blur)
    if kernel is not None:
        arr = ndimage.convolve(arr, kernel, mode="nearest")
    work = GrayImage.from_float(arr)
    if spec.downscale < 1.0:
        small_w = max(1, int(math.floor(work.width * spec.downscale + 0.5)))
        small_h = max(1, int(math.floor(work.height * spec.downscale + 0.5)))
        work = resize(resize(work, small_w, small_h), work.width, work.height)
    arr = work.astype_float()
    if spec.noise_sigma > 0:
        arr = arr + rng.normal(0.0, spec.noise_sigma, size=arr.shape)
    axis, strength = spec.illumination_gradient
    if strength > 0:
        n = arr.shape[1] if axis == "x" else arr.shape[0]
        ramp = np.linspace(1.0 - strength / 2.0, 1.0 + strength / 2.0, n)
        arr = arr * (ramp[None, :] if axis == "x" else ramp[:, None])
    return GrayImage.from_float(arr), sym_corners


def _background(canvas: tuple[int, int], spec: DegradationSpec) -> np.ndarray:
    w, h = canvas
    if spec.background == "flat":
        return np.full((h, w), spec.background_level, dtype=np.float64)
    rng = np.random.default_rng(spec.background_seed)
    coarse = rng.normal(spec.background_level, 24.0, size=(h // 32 + 2, w // 32 + 2))
    blotches = resize(GrayImage.from_float(np.clip(coarse, 0, 255)), w, h)
    return blotches.astype_float()


def synthesize_scene(
    payloads: list[bytes],
    specs: list[DegradationSpec],
    canvas: tuple[int, int],
    seed: int,
    gap: int = 16,
) -> tuple[GrayImage, list[GroundTruth]]:
    """Render, degrade and shelf-pack codes onto a canvas.

    Placement is deterministic (row-major shelves with a fixed gap); the seed
    feeds only the additive noise stage. Raises when codes overlap the canvas.
    """
    if len(payloads) != len(specs):
        raise ValueError("payloads and specs must align")
    if not payloads:
        raise ValueError("need at least one code")
    w, h = canvas
    rng = np.random.default_rng(seed)
    scene = _background(canvas, specs[0])
    truths: list[GroundTruth] = []
    x_cursor, y_cursor, row_h = gap, gap, 0
    for payload, spec in zip(payloads, specs):
        sym = encode(payload, spec.ec_level)
        base = render(sym, spec.module_px, spec.quiet_modules)
        patch, sym_corners = degrade_patch(
            base, spec, sym.side * spec.module_px, spec.quiet_modules * spec.module_px, rng
        )
        pw, ph = patch.width, patch.height
        if x_cursor + pw + gap > w:
            x_cursor = gap
            y_cursor += row_h + gap
            row_h = 0
        if x_cursor + pw + gap > w or y_cursor + ph + gap > h:
            raise ValueError(f"codes do not fit on a {w}x{h} canvas")
        scene[y_cursor : y_cursor + ph, x_cursor : x_cursor + pw] = patch.astype_float()
        corners = sym_corners + np.array([x_cursor, y_cursor])
        box = BoundingBox(
            int(math.floor(corners[:, 0].min())),
            int(math.floor(corners[:, 1].min())),
            int(math.ceil(corners[:, 0].max())) - 1,
            int(math.ceil(corners[:, 1].max())) - 1,
        )
        truths.append(GroundTruth(payload=payload, box=box))
        x_cursor += pw + gap
        row_h = max(row_h, ph)
    return GrayImage.from_float(scene), truths
