"""Candidate QR box detection on a downscaled thumbnail.

A classical finder-pattern search stands in for a learned detector behind the
same contract: thumbnail in, full-resolution boxes out, biased toward recall
(orphan finder evidence still emits low-score boxes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .binarize import binarize_otsu
from .imaging import BoundingBox, GrayImage, resize

THUMB_MAX = (576, 432)

RATIO_TOLERANCE = 0.5  # per-segment slack around the ideal 1:1:3:1:1 runs
MERGE_RADIUS_MODULES = 2.0
MODULE_RATIO_LIMIT = 1.6
RIGHT_ANGLE_SLACK_DEG = 20.0
ORPHAN_SCORE = 0.3
MAX_PATTERNS = 48  # combinatorial guard for pathological scenes


@dataclass(frozen=True)
class FinderPattern:
    cx: float
    cy: float
    module_size: float

    @property
    def center(self) -> tuple[float, float]:
        return (self.cx, self.cy)


@dataclass(frozen=True)
class Detection:
    box: BoundingBox
    score: float
    finder_centers: tuple[tuple[float, float], ...]


def make_thumbnail(
    img: GrayImage, max_dims: tuple[int, int] = THUMB_MAX
) -> tuple[GrayImage, float, float]:
    """Fit the image inside max_dims preserving aspect ratio; never upscale.

    Returns (thumbnail, scale_x, scale_y) with scales mapping thumbnail
    coordinates back to full resolution.
    """
    max_w, max_h = max_dims
    scale = min(1.0, max_w / img.width, max_h / img.height)
    if scale >= 1.0:
        return img, 1.0, 1.0
    tw = min(max(1, int(math.floor(img.width * scale + 0.5))), max_w)
    th = min(max(1, int(math.floor(img.height * scale + 0.5))), max_h)
    thumb = resize(img, tw, th)
    return thumb, img.width / tw, img.height / th


def _ratio_ok(
    runs: np.ndarray | list[float],
    tolerance: float = RATIO_TOLERANCE,
    min_slack: float = 0.0,
) -> bool:
    """1:1:3:1:1 within a per-segment tolerance.

    min_slack adds an absolute pixel allowance for heavily quantized runs
    (cross-checks along steep or diagonal directions at ~2 px modules).
    """
    total = float(sum(runs))
    if total < 7.0:
        return False
    module = total / 7.0
    expected = (module, module, 3.0 * module, module, module)
    return all(abs(r - e) <= max(tolerance * e, min_slack) for r, e in zip(runs, expected))


def _trace(dark: np.ndarray, x: int, y: int, dx: int, dy: int, cap: float) -> list[int] | None:
    """Run lengths [dark, light, dark] stepping away from a dark center pixel."""
    h, w = dark.shape
    runs = [0, 0, 0]
    seg = 0
    while True:
        x += dx
        y += dy
        if not (0 <= x < w and 0 <= y < h):
            break
        if bool(dark[y, x]) == (seg % 2 == 0):
            runs[seg] += 1
            if runs[seg] > cap:
                return None
        else:
            seg += 1
            if seg == 3:
                break
            runs[seg] = 1
    if seg < 2 or runs[2] == 0:
        return None
    return runs


def _cross_check(
    dark: np.ndarray,
    x: int,
    y: int,
    dx: int,
    dy: int,
    expected_total: float,
    min_slack: float = 0.0,
) -> tuple[float, float] | None:
    """Validate 1:1:3:1:1 along (dx, dy) through (x, y).

    Returns (signed center offset along the direction, total run length).
    """
    if not (0 <= x < dark.shape[1] and 0 <= y < dark.shape[0]) or not dark[y, x]:
        return None
    cap = expected_total
    neg = _trace(dark, x, y, -dx, -dy, cap)
    pos = _trace(dark, x, y, dx, dy, cap)
    if neg is None or pos is None:
        return None
    runs = [neg[2], neg[1], neg[0] + pos[0] + 1, pos[1], pos[2]]
    total = float(sum(runs))
    if abs(total - expected_total) > expected_total:
        return None
    if not _ratio_ok(runs, min_slack=min_slack):
        return None
    return (pos[0] - neg[0]) / 2.0, total


def _row_run_lengths(row_dark: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(start indices, lengths) of maximal runs along one row."""
    changes = np.flatnonzero(np.diff(row_dark.astype(np.int8)))
    starts = np.concatenate(([0], changes + 1))
    lengths = np.diff(np.concatenate((starts, [row_dark.size])))
    return starts, lengths


def find_finder_patterns(img: GrayImage, dark_threshold: int = 128) -> list[FinderPattern]:
    """Scanline search for finder bullseyes, confirmed on vertical and diagonal.

    Accepts binary or grayscale input; pixels below dark_threshold count as
    dark. Rows are scanned first, then columns (catches patterns whose
    horizontal runs are damaged). Duplicates within two module sizes merge.
    """
    dark = img.pixels < dark_threshold
    found: list[list[float]] = []  # [cx, cy, module, weight]
    _scan_lines(dark, found, transposed=False)
    _scan_lines(dark.T, found, transposed=True)
    found.sort(key=lambda p: (-p[3], p[1], p[0]))
    return [FinderPattern(p[0], p[1], p[2]) for p in found[:MAX_PATTERNS]]


def _scan_lines(dark: np.ndarray, found: list[list[float]], transposed: bool) -> None:
    h = dark.shape[0]
    for y in range(h):
        starts, lengths = _row_run_lengths(dark[y])
        first_dark = 0 if dark[y, 0] else 1
        for i in range(first_dark, starts.size - 4, 2):
            window = lengths[i : i + 5]
            if not _ratio_ok(window):
                continue
            total_h = float(window.sum())
            module_est = total_h / 7.0
            slack = 0.75 if module_est < 3.0 else 0.0
            cx = starts[i + 2] + window[2] / 2.0 - 0.5
            xi = int(round(cx))
            vert = _cross_check(dark, xi, y, 0, 1, total_h, min_slack=slack)
            if vert is None:
                continue
            cy = y + vert[0]
            yi = int(round(cy))
            horiz = _cross_check(dark, xi, yi, 1, 0, vert[1], min_slack=slack)
            if horiz is None:
                continue
            cx = xi + horiz[0]
            xi = int(round(cx))
            diag_slack = max(1.25, slack) if module_est < 3.0 else 1.0
            diag = _cross_check(dark, xi, yi, 1, 1, vert[1] * math.sqrt(2.0), min_slack=diag_slack)
            if diag is None:
                continue
            module = (horiz[1] + vert[1]) / 14.0
            if transposed:
                _merge_candidate(found, cy, cx, module)
            else:
                _merge_candidate(found, cx, cy, module)


def _merge_candidate(found: list[list[float]], cx: float, cy: float, module: float) -> None:
    for entry in found:
        radius = MERGE_RADIUS_MODULES * max(entry[2], module)
        if abs(entry[0] - cx) <= radius and abs(entry[1] - cy) <= radius:
            weight = entry[3]
            entry[0] = (entry[0] * weight + cx) / (weight + 1)
            entry[1] = (entry[1] * weight + cy) / (weight + 1)
            entry[2] = (entry[2] * weight + module) / (weight + 1)
            entry[3] = weight + 1
            return
    found.append([cx, cy, module, 1.0])


@dataclass(frozen=True)
class TripleGeometry:
    """An oriented finder triple: corner A with B, C along the symbol axes."""

    a: FinderPattern
    b: FinderPattern
    c: FinderPattern
    module_size: float
    modules_between: float  # center-to-center distance in modules
    quality: float  # 0 is ideal; grows with angle/size inconsistency

    @property
    def version_estimate(self) -> int:
        v = round((self.modules_between + 7 - 17) / 4)
        return min(max(v, 1), 10)

    def symbol_corners(self) -> np.ndarray:
        """TL,TR,BR,BL symbol corner estimates (parallelogram completion)."""
        a = np.array(self.a.center)
        b = np.array(self.b.center)
        c = np.array(self.c.center)
        u = (b - a) / self.modules_between
        v = (c - a) / self.modules_between
        tl = a - 3.5 * (u + v)
        tr = b + 3.5 * (u - v)
        bl = c + 3.5 * (v - u)
        br = tr + bl - tl
        return np.stack([tl, tr, br, bl])


def orient_triple(
    p1: FinderPattern, p2: FinderPattern, p3: FinderPattern
) -> TripleGeometry | None:
    """Geometry of a candidate triple, or None when it cannot be one symbol."""
    sizes = [p.module_size for p in (p1, p2, p3)]
    if max(sizes) > MODULE_RATIO_LIMIT * min(sizes):
        return None
    ms = float(np.mean(sizes))
    best: TripleGeometry | None = None
    for a, b, c in ((p1, p2, p3), (p2, p1, p3), (p3, p1, p2)):
        u = np.array(b.center) - np.array(a.center)
        v = np.array(c.center) - np.array(a.center)
        lu, lv = np.linalg.norm(u), np.linalg.norm(v)
        if lu < 1e-6 or lv < 1e-6:
            continue
        cos_angle = float(np.clip(np.dot(u, v) / (lu * lv), -1.0, 1.0))
        angle_err = abs(math.degrees(math.acos(cos_angle)) - 90.0)
        if angle_err > RIGHT_ANGLE_SLACK_DEG:
            continue
        d_modules = (lu + lv) / 2.0 / ms
        if not 8.0 <= d_modules <= 67.0:  # v1 .. v10 center spacing with slack
            continue
        if float(np.cross(u, v)) < 0:
            b, c = c, b
        side_skew = abs(math.log(lu / lv))
        quality = angle_err / RIGHT_ANGLE_SLACK_DEG + (max(sizes) / min(sizes) - 1.0) + side_skew
        if best is None or quality < best.quality:
            best = TripleGeometry(a, b, c, ms, d_modules, quality)
    return best


def _box_from_corners(corners: np.ndarray, pad: float, dims: tuple[int, int]) -> BoundingBox | None:
    w, h = dims
    x0 = math.floor(corners[:, 0].min() - pad)
    y0 = math.floor(corners[:, 1].min() - pad)
    x1 = math.ceil(corners[:, 0].max() + pad)
    y1 = math.ceil(corners[:, 1].max() + pad)
    return BoundingBox(int(x0), int(y0), int(x1), int(y1)).clamped(w, h)


def group_finders_to_boxes(
    patterns: list[FinderPattern], thumb_dims: tuple[int, int]
) -> list[Detection]:
    """Assemble finder evidence into boxes.

    Mutually consistent triples become high-score boxes covering the implied
    symbol extent plus one module; leftover pairs and singles emit low-score
    boxes so downstream decoding still gets a chance.
    """
    detections: list[Detection] = []
    scored: list[tuple[float, tuple[int, int, int], TripleGeometry]] = []
    for combo in combinations(range(len(patterns)), 3):
        geom = orient_triple(*(patterns[i] for i in combo))
        if geom is not None:
            scored.append((geom.quality, combo, geom))
    scored.sort(key=lambda item: item[0])
    used: set[int] = set()
    for quality, combo, geom in scored:
        if used.intersection(combo):
            continue
        box = _box_from_corners(geom.symbol_corners(), geom.module_size, thumb_dims)
        if box is None:
            continue
        used.update(combo)
        score = min(1.0, 0.9 + 0.1 * max(0.0, 1.0 - quality))
        centers = tuple(p.center for p in (geom.a, geom.b, geom.c))
        detections.append(Detection(box=box, score=score, finder_centers=centers))

    leftovers = [i for i in range(len(patterns)) if i not in used]
    paired: set[int] = set()
    for i, j in combinations(leftovers, 2):
        if i in paired or j in paired:
            continue
        p, q = patterns[i], patterns[j]
        ms = (p.module_size + q.module_size) / 2.0
        dist = math.hypot(p.cx - q.cx, p.cy - q.cy)
        if max(p.module_size, q.module_size) > MODULE_RATIO_LIMIT * min(
            p.module_size, q.module_size
        ) or not 8.0 * ms <= dist <= 67.0 * 1.5 * ms:
            continue
        # Two finders might be adjacent corners (symbol on either side of the
        # pair axis) or the diagonal pair; emit a hypothesis box for each case.
        axis = (np.array(q.center) - np.array(p.center)) / dist
        normal = np.array([-axis[1], axis[0]])
        ends = [
            np.array(p.center) - 3.5 * ms * axis,
            np.array(q.center) + 3.5 * ms * axis,
        ]
        hypothesis_corners = [
            np.array([e + s * (dist + 3.5 * ms) * normal for e in ends] + [np.array(e) for e in ends])
            for s in (-1.0, 1.0)
        ]
        mid = (np.array(p.center) + np.array(q.center)) / 2.0
        diag_half = (dist / math.sqrt(2.0) + 7.0 * ms) * 0.65
        hypothesis_corners.append(np.array([mid - diag_half, mid + diag_half]))
        emitted = False
        for corners in hypothesis_corners:
            box = _box_from_corners(corners, ms, thumb_dims)
            if box is not None:
                emitted = True
                detections.append(
                    Detection(box=box, score=ORPHAN_SCORE, finder_centers=(p.center, q.center))
                )
        if emitted:
            paired.update((i, j))
    for i in leftovers:
        if i in paired:
            continue
        p = patterns[i]
        half = 17.5 * p.module_size
        corners = np.array([[p.cx - half, p.cy - half], [p.cx + half, p.cy + half]])
        box = _box_from_corners(corners, p.module_size, thumb_dims)
        if box is not None:
            detections.append(Detection(box=box, score=ORPHAN_SCORE, finder_centers=(p.center,)))
    return detections


def detect(img: GrayImage, thumb_max: tuple[int, int] = THUMB_MAX) -> list[Detection]:
    """Full-image detection: thumbnail, binarize, find, group, back-project.

    Output is sorted by score descending, then larger area, then box order;
    identical input always yields identical output.
    """
    thumb, sx, sy = make_thumbnail(img, thumb_max)
    binary = binarize_otsu(thumb)
    patterns = find_finder_patterns(binary)
    thumb_dets = group_finders_to_boxes(patterns, (thumb.width, thumb.height))
    detections = []
    for det in thumb_dets:
        box = det.box.scaled(sx, sy).clamped(img.width, img.height)
        if box is None:
            continue
        centers = tuple((cx * sx, cy * sy) for cx, cy in det.finder_centers)
        detections.append(Detection(box=box, score=det.score, finder_centers=centers))
    detections.sort(key=lambda d: (-d.score, -d.box.area, d.box))
    return detections
