"""Ordered multi-trial enhancement cascade over a detected code patch.

Each stage applies one cheap transform combination (polarity, rescale,
contrast, morphology, or a final super-resolution pass), binarizes, tries a
full decode, and stops the cascade at the first success. Stage order encodes
cost: everything ahead of super resolution is cheap classical processing.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from itertools import combinations

import numpy as np

import functools

from .binarize import binarize_otsu, clahe_binarize
from .codec import DecodedPayload, QrDecodeError, decode_matrix, identity_binarizer, sample_grid
from .codec.layout import format_positions_copy1, format_positions_copy2, function_layout
from .codec.raster import DegenerateGeometryError
from .detector import TripleGeometry, find_finder_patterns, orient_triple
from .homography import apply_homography, fit_homography, fit_homography_lsq, unit_square_to_quad
from .imaging import GrayImage, StructuringElement, invert, resize
from .superres import SuperResolverError, default_super_resolver

# Part of this module's public surface alongside the cascade itself.
from .binarize import clahe, otsu_threshold  # noqa: F401
from .morphology import dilate, erode

SR_GATE_PX = 192  # patches at least this tall and wide skip super resolution

OUTCOME_SUCCESS = "success"
OUTCOME_FAILURE = "decode-failure"
OUTCOME_SKIPPED = "skipped"


@dataclass(frozen=True)
class Stage:
    """One cascade attempt: transform combination plus binarizer choice."""

    scale: float = 1.0
    invert: bool = False
    binarizer: str = "otsu"  # "otsu" or "clahe"
    clahe_beta: float | None = None
    morphology: str = "none"  # "none", "dilate" or "erode"
    super_resolution: bool = False

    def __post_init__(self) -> None:
        if self.scale <= 0:
            raise ValueError("stage scale must be positive")
        if self.binarizer not in ("otsu", "clahe"):
            raise ValueError(f"unknown binarizer {self.binarizer!r}")
        if self.binarizer == "clahe" and self.clahe_beta is None:
            raise ValueError("clahe binarizer needs clahe_beta")
        if self.morphology not in ("none", "dilate", "erode"):
            raise ValueError(f"unknown morphology {self.morphology!r}")

    @property
    def is_identity(self) -> bool:
        return (
            self.scale == 1.0
            and not self.invert
            and self.binarizer == "otsu"
            and self.morphology == "none"
            and not self.super_resolution
        )

    def describe(self) -> str:
        parts = []
        if self.invert:
            parts.append("inverted")
        if self.scale != 1.0:
            parts.append(f"scale{self.scale:g}")
        if self.binarizer == "clahe":
            parts.append(f"clahe{self.clahe_beta:g}")
        if self.morphology != "none":
            parts.append(self.morphology)
        if self.super_resolution:
            parts.append("sr")
        return "+".join(parts) if parts else "identity"


@dataclass(frozen=True)
class EnhancementPlan:
    stages: tuple[Stage, ...]

    def __post_init__(self) -> None:
        stages = tuple(self.stages)
        if not stages:
            raise ValueError("plan needs at least one stage")
        identity_count = sum(1 for s in stages if s.is_identity)
        if identity_count != 1 or not stages[0].is_identity:
            raise ValueError("exactly one identity stage is required, at index 0")
        sr_flags = [s.super_resolution for s in stages]
        if True in sr_flags and not all(sr_flags[sr_flags.index(True) :]):
            raise ValueError("super-resolution stages must be the final stages")
        object.__setattr__(self, "stages", stages)

    def __len__(self) -> int:
        return len(self.stages)

    def prefix(self, count: int) -> "EnhancementPlan":
        return EnhancementPlan(self.stages[:count])

    def without_super_resolution(self) -> "EnhancementPlan":
        return EnhancementPlan(tuple(s for s in self.stages if not s.super_resolution))


@dataclass(frozen=True)
class StageResult:
    stage_index: int
    attempted: bool
    outcome: str
    elapsed_us: int
    stage: Stage


@dataclass(frozen=True)
class CascadeConfig:
    """Knobs for the default plan; values mirror the shipped defaults."""

    scales: tuple[float, ...] = (0.5, 0.75, 1.5, 2.0)
    clahe_betas: tuple[float, ...] = (2.0, 4.0)
    clahe_grid: tuple[int, int] = (8, 8)
    enable_morphology: bool = True
    enable_super_resolution: bool = True
    morphology_kernel: int = 3
    sr_gate_px: int = SR_GATE_PX


def build_default_plan(config: CascadeConfig | None = None) -> EnhancementPlan:
    """The shipped stage order: cheap and most likely first, SR gated last.

    identity -> inverted -> CLAHE (each beta, both polarities) -> rescales
    (both polarities) -> dilate/erode -> SR (both polarities).
    """
    config = config or CascadeConfig()
    if not config.scales:
        raise ValueError("scale set must not be empty")
    stages: list[Stage] = [Stage(), Stage(invert=True)]
    for beta in config.clahe_betas:
        for inv in (False, True):
            stages.append(Stage(binarizer="clahe", clahe_beta=beta, invert=inv))
    for scale in config.scales:
        for inv in (False, True):
            stages.append(Stage(scale=scale, invert=inv))
    if config.enable_morphology:
        stages.append(Stage(morphology="dilate"))
        stages.append(Stage(morphology="erode"))
    if config.enable_super_resolution:
        stages.append(Stage(super_resolution=True))
        stages.append(Stage(super_resolution=True, invert=True))
    return EnhancementPlan(tuple(stages))


def _apply_stage(patch: GrayImage, stage: Stage, resolver, kernel: int) -> GrayImage:
    work = patch
    if stage.invert:
        work = invert(work)
    if stage.scale != 1.0:
        work = resize(
            work,
            max(1, int(math.floor(work.width * stage.scale + 0.5))),
            max(1, int(math.floor(work.height * stage.scale + 0.5))),
        )
    if stage.morphology == "dilate":
        work = dilate(work, StructuringElement.square(kernel))
    elif stage.morphology == "erode":
        work = erode(work, StructuringElement.square(kernel))
    if stage.super_resolution:
        work = resolver.upscale(work)
    return work


def _binarize_stage(img: GrayImage, stage: Stage, grid: tuple[int, int]) -> GrayImage:
    if stage.binarizer == "clahe":
        return clahe_binarize(img, stage.clahe_beta, grid)
    return binarize_otsu(img)


def _corners_for_side(geom: TripleGeometry, side: int) -> np.ndarray:
    """Symbol corners under a version hypothesis (parallelogram completion)."""
    spacing = side - 7
    a = np.array(geom.a.center)
    b = np.array(geom.b.center)
    c = np.array(geom.c.center)
    u = (b - a) / spacing
    v = (c - a) / spacing
    tl = a - 3.5 * (u + v)
    tr = b + 3.5 * (u - v)
    bl = c + 3.5 * (v - u)
    br = tr + bl - tl
    return np.stack([tl, tr, br, bl])


def _measure_corner(
    dark: np.ndarray, center: np.ndarray, direction: np.ndarray
) -> np.ndarray | None:
    """Finder outer corner: last dark sample walking out along a diagonal.

    direction is the per-module step toward the corner; the outer ring edge
    sits 3.5 modules out, so the walk scans a window around that distance.
    """
    h, w = dark.shape
    last_dark = None
    light_streak = 0
    t = 2.4
    while t <= 5.0:
        x = int(math.floor(center[0] + t * direction[0]))
        y = int(math.floor(center[1] + t * direction[1]))
        if not (0 <= x < w and 0 <= y < h):
            break
        if dark[y, x]:
            last_dark = t
            light_streak = 0
        else:
            light_streak += 1
            if light_streak >= 4 and last_dark is not None:
                break
        t += 0.1
    if last_dark is None or not 2.8 <= last_dark <= 4.4:
        return None
    return center + (last_dark + 0.05) * direction


_OUTER_CORNERS = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def _candidate_corner_sets(dark: np.ndarray, geom: TripleGeometry, side: int) -> list[np.ndarray]:
    """Corner estimates to try, most perspective-aware first."""
    spacing = side - 7
    a = np.array(geom.a.center)
    b = np.array(geom.b.center)
    c = np.array(geom.c.center)
    u = (b - a) / spacing
    v = (c - a) / spacing
    module_px = (np.linalg.norm(u) + np.linalg.norm(v)) / 2.0
    corner_pts = np.array([[0.0, 0.0], [side, 0.0], [side, side], [0.0, side]])

    h_lsq = None
    measured = [
        _measure_corner(dark, a, -u - v),
        _measure_corner(dark, b, u - v),
        _measure_corner(dark, c, v - u),
    ]
    if all(m is not None for m in measured):
        src = np.array(
            [
                [3.5, 3.5],
                [side - 3.5, 3.5],
                [3.5, side - 3.5],
                [0.0, 0.0],
                [side, 0.0],
                [0.0, side],
            ]
        )
        dst = np.stack([a, b, c, *measured])
        try:
            h_lsq = fit_homography_lsq(src, dst)
        except (DegenerateGeometryError, np.linalg.LinAlgError):
            h_lsq = None

    sets: list[np.ndarray] = []
    if side >= 25:  # version 2+ carries a bottom-right alignment pattern
        align_module = np.array([[side - 6.5, side - 6.5]])
        if h_lsq is not None:
            predicted = apply_homography(h_lsq, align_module)[0]
        else:
            predicted = a + (side - 10.0) * (u + v)
        found = _find_alignment(dark, predicted, module_px)
        if found is not None:
            src = np.array(
                [[3.5, 3.5], [side - 3.5, 3.5], [3.5, side - 3.5], [side - 6.5, side - 6.5]]
            )
            dst = np.stack([a, b, c, np.array(found)])
            try:
                sets.append(apply_homography(fit_homography(src, dst), corner_pts))
            except (DegenerateGeometryError, np.linalg.LinAlgError):
                pass
    if h_lsq is not None:
        try:
            sets.append(apply_homography(h_lsq, corner_pts))
        except DegenerateGeometryError:
            pass
    sets.append(_corners_for_side(geom, side))
    return sets


def _find_alignment(
    dark: np.ndarray, predicted: np.ndarray, module_px: float
) -> tuple[float, float] | None:
    """Search near the predicted point for a dark 1:1:1 cross (alignment core)."""
    h, w = dark.shape
    px, py = float(predicted[0]), float(predicted[1])
    radius = max(2, int(round(3.0 * module_px)))
    cap = 2.0 * module_px + 2.0
    best: tuple[float, tuple[float, float]] | None = None
    cx0, cy0 = int(round(px)), int(round(py))
    for dy in range(-radius, radius + 1):
        y = cy0 + dy
        if not 0 <= y < h:
            continue
        for dx in range(-radius, radius + 1):
            x = cx0 + dx
            if not 0 <= x < w or not dark[y, x]:
                continue
            center = _alignment_cross(dark, x, y, cap, module_px)
            if center is None:
                continue
            dist = math.hypot(center[0] - px, center[1] - py)
            if best is None or dist < best[0]:
                best = (dist, center)
    return best[1] if best else None


def _alignment_cross(
    dark: np.ndarray, x: int, y: int, cap: float, module_px: float
) -> tuple[float, float] | None:
    """Refined center when the dark run through (x, y) is about one module wide."""
    h, w = dark.shape
    lo = x
    while lo - 1 >= 0 and dark[y, lo - 1] and x - lo < cap:
        lo -= 1
    hi = x
    while hi + 1 < w and dark[y, hi + 1] and hi - x < cap:
        hi += 1
    run_w = hi - lo + 1
    if not 0.4 * module_px <= run_w <= 1.8 * module_px + 1:
        return None
    cx = (lo + hi) / 2.0
    up = y
    while up - 1 >= 0 and dark[up - 1, x] and y - up < cap:
        up -= 1
    down = y
    while down + 1 < h and dark[down + 1, x] and down - y < cap:
        down += 1
    run_h = down - up + 1
    if not 0.4 * module_px <= run_h <= 1.8 * module_px + 1:
        return None
    return (cx, (up + down) / 2.0)


def _version_hypotheses(geom: TripleGeometry) -> list[int]:
    raw = (geom.modules_between + 7 - 17) / 4
    primary = min(max(round(raw), 1), 10)
    order = [primary]
    frac = raw - math.floor(raw)
    neighbors = [primary + 1, primary - 1] if frac >= 0.5 else [primary - 1, primary + 1]
    order.extend(v for v in neighbors if 1 <= v <= 10)
    return order


@functools.lru_cache(maxsize=None)
def _scoring_template(version: int) -> tuple[np.ndarray, np.ndarray]:
    """(expected darkness, mask) over modules fixed for a version.

    Finder cores, separators, timing, alignment and version bits are
    mask-independent; format modules are excluded from scoring.
    """
    base, is_function = function_layout(version)
    mask = is_function.copy()
    side = base.shape[0]
    for x, y in format_positions_copy1(side) + format_positions_copy2(side):
        mask[y, x] = False
    return base, mask


def _sample_bits(dark: np.ndarray, corners: np.ndarray, side: int) -> np.ndarray | None:
    """Cheap single-pixel module sampling used for scoring candidate grids."""
    try:
        h = unit_square_to_quad(np.asarray(corners, dtype=np.float64))
        centers = (np.arange(side) + 0.5) / side
        u, v = np.meshgrid(centers, centers)
        mapped = apply_homography(h, np.stack([u.ravel(), v.ravel()], axis=1))
    except DegenerateGeometryError:
        return None
    height, width = dark.shape
    xs = np.clip(np.floor(mapped[:, 0]).astype(np.int64), 0, width - 1)
    ys = np.clip(np.floor(mapped[:, 1]).astype(np.int64), 0, height - 1)
    return dark[ys, xs].reshape(side, side)


_CONSISTENCY_OFFSETS = ((0.0, 0.0), (0.28, 0.0), (-0.28, 0.0), (0.0, 0.28), (0.0, -0.28))


def _score_corners(dark: np.ndarray, corners: np.ndarray, side: int) -> float:
    """Blend of function-template agreement and within-module sample agreement.

    The template covers finders/timing/alignment; the consistency term reacts
    everywhere: samples spread inside one module agree only when the lattice
    is actually aligned with the image, data region included.
    """
    try:
        h = unit_square_to_quad(np.asarray(corners, dtype=np.float64))
    except DegenerateGeometryError:
        return -1.0
    base = np.arange(side) + 0.5
    pts = []
    for du, dv in _CONSISTENCY_OFFSETS:
        u, v = np.meshgrid((base + du) / side, (base + dv) / side)
        pts.append(np.stack([u.ravel(), v.ravel()], axis=1))
    try:
        mapped = apply_homography(h, np.concatenate(pts, axis=0))
    except DegenerateGeometryError:
        return -1.0
    height, width = dark.shape
    xs = np.clip(np.floor(mapped[:, 0]).astype(np.int64), 0, width - 1)
    ys = np.clip(np.floor(mapped[:, 1]).astype(np.int64), 0, height - 1)
    samples = dark[ys, xs].reshape(len(_CONSISTENCY_OFFSETS), side, side)
    version = (side - 17) // 4
    expected, mask = _scoring_template(version)
    template = float((samples[0][mask] == expected[mask]).mean())
    consistency = float((samples == samples[0]).all(axis=0).mean())
    return 0.5 * template + 0.5 * consistency


def _refine_bottom_right(
    dark: np.ndarray, corners: np.ndarray, side: int, base_score: float
) -> tuple[float, np.ndarray]:
    """Grid-search the bottom-right corner against the function template.

    The other three corners come from measured structure; only the fourth is
    an extrapolation, so the search is two-dimensional.
    """
    u = (corners[1] - corners[0]) / side
    v = (corners[3] - corners[0]) / side
    best_score, best = base_score, corners
    for step in (0.5, 0.25):
        deltas = (-2 * step, -step, 0.0, step, 2 * step)
        origin = best[2].copy()
        for du in deltas:
            for dv in deltas:
                if du == 0.0 and dv == 0.0:
                    continue
                candidate = best.copy()
                candidate[2] = origin + du * u + dv * v
                score = _score_corners(dark, candidate, side)
                if score > best_score:
                    best_score, best = score, candidate
    return best_score, best


def try_decode_binary(
    binary: GrayImage, max_triples: int = 3, max_attempts: int = 4
) -> DecodedPayload | None:
    """Locate finders in a binarized patch and attempt a matrix decode.

    Candidate (version, corner) grids are ranked by how well their sampled
    function modules match the expected template, then decoded best-first.
    """
    patterns = find_finder_patterns(binary)
    if len(patterns) < 3:
        return None
    dark = binary.pixels < 128
    geoms: list[TripleGeometry] = []
    for combo in combinations(patterns, 3):
        geom = orient_triple(*combo)
        if geom is not None:
            geoms.append(geom)
    geoms.sort(key=lambda g: g.quality)
    ranked: list[tuple[float, int, np.ndarray]] = []
    for geom in geoms[:max_triples]:
        for version in _version_hypotheses(geom):
            side = 17 + 4 * version
            scored = [
                (_score_corners(dark, corners, side), corners)
                for corners in _candidate_corner_sets(dark, geom, side)
            ]
            score, corners = max(scored, key=lambda item: item[0])
            if score < 0.55:  # nowhere near a symbol; skip the refinement cost
                continue
            score, corners = _refine_bottom_right(dark, corners, side, score)
            ranked.append((score, side, corners))
    ranked.sort(key=lambda item: -item[0])
    for score, side, corners in ranked[:max_attempts]:
        try:
            return decode_matrix(sample_grid(binary, corners, side, identity_binarizer))
        except (QrDecodeError, DegenerateGeometryError, ValueError):
            continue
    return None


def decode_patch(
    patch: GrayImage,
    plan: EnhancementPlan,
    sr_resolver=None,
    config: CascadeConfig | None = None,
) -> tuple[DecodedPayload | None, list[StageResult]]:
    """Run the cascade over one patch, short-circuiting at the first decode.

    Super-resolution stages only run for patches smaller than the gate on
    their shorter side; a failing external resolver marks its stage as a
    decode failure and the cascade continues.
    """
    config = config or CascadeConfig()
    resolver = sr_resolver if sr_resolver is not None else default_super_resolver()
    sr_allowed = min(patch.width, patch.height) < config.sr_gate_px
    results: list[StageResult] = []
    payload: DecodedPayload | None = None
    for index, stage in enumerate(plan.stages):
        if payload is not None or (stage.super_resolution and not sr_allowed):
            results.append(StageResult(index, False, OUTCOME_SKIPPED, 0, stage))
            continue
        t0 = time.perf_counter_ns()
        try:
            work = _apply_stage(patch, stage, resolver, config.morphology_kernel)
            binary = _binarize_stage(work, stage, config.clahe_grid)
            decoded = try_decode_binary(binary)
        except SuperResolverError:
            decoded = None
        elapsed_us = (time.perf_counter_ns() - t0) // 1000
        if decoded is not None:
            payload = decoded
            results.append(StageResult(index, True, OUTCOME_SUCCESS, int(elapsed_us), stage))
        else:
            results.append(StageResult(index, True, OUTCOME_FAILURE, int(elapsed_us), stage))
    return payload, results


def winning_stage(results: list[StageResult]) -> int | None:
    for res in results:
        if res.outcome == OUTCOME_SUCCESS:
            return res.stage_index
    return None
