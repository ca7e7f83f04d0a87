"""Pick the user-intended code among multiple decodes and map failures to feedback.

Selection precedence: an intersecting pointing ray beats the ROI shortlist,
which beats plain largest-area. Ties resolve by area and then by box
coordinates so the choice is a total order (permutation invariant).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .codec import DecodedPayload
from .detector import Detection, detect
from .enhancer import (
    CascadeConfig,
    EnhancementPlan,
    StageResult,
    build_default_plan,
    decode_patch,
    winning_stage,
)
from .imaging import BoundingBox, GrayImage, Ray, crop_with_margin, intersect_ray_box

FEEDBACK_OK = "ok"
FEEDBACK_NO_CODE = "no_code_found"
FEEDBACK_UNCLEAR = "code_unclear"
FEEDBACK_TOO_SMALL = "code_too_small"

# Patches at or below this area (the 100x100 px marker) rarely decode; when
# every failed detection is this small we suggest getting closer instead.
SMALL_PATCH_AREA = 10_000

Candidate = tuple[Detection, DecodedPayload]


@dataclass(frozen=True)
class ScanContext:
    """Caller-supplied salience signals; both are optional."""

    roi: BoundingBox | None = None
    pointing: Ray | None = None


@dataclass(frozen=True)
class ScanOutcome:
    status: str  # "selected" | "no_code_found" | "code_unclear"
    feedback: str
    selected: Candidate | None
    all_decoded: tuple[Candidate, ...]
    detections: tuple[Detection, ...]
    telemetry: tuple[tuple[StageResult, ...], ...] = ()


@dataclass(frozen=True)
class ScanConfig:
    plan: EnhancementPlan = field(default_factory=build_default_plan)
    cascade: CascadeConfig = field(default_factory=CascadeConfig)
    thumb_max: tuple[int, int] = (576, 432)
    margin_frac: float = 0.125
    sr_resolver: object | None = None


def _tie_key(candidate: Candidate) -> tuple:
    det = candidate[0]
    return (-det.box.area, det.box.x_min, det.box.y_min, det.box.x_max, det.box.y_max)


def shortlist_by_roi(candidates: list[Candidate], roi: BoundingBox) -> list[Candidate]:
    """Keep candidates whose box center lies inside the ROI, order preserved."""
    return [c for c in candidates if roi.contains_point(*c[0].box.center)]


def select_by_pointing(candidates: list[Candidate], ray: Ray) -> Candidate | None:
    """The intersected candidate closest to the ray origin (ties: larger area)."""
    best: tuple[float, tuple, Candidate] | None = None
    for cand in candidates:
        t = intersect_ray_box(ray, cand[0].box)
        if t is None:
            continue
        key = (t, _tie_key(cand))
        if best is None or _pointing_less(key, (best[0], best[1])):
            best = (t, _tie_key(cand), cand)
    return best[2] if best else None


def _pointing_less(key: tuple, best: tuple) -> bool:
    t, tie = key
    bt, btie = best
    if abs(t - bt) > 1e-6:
        return t < bt
    return tie < btie


def disambiguate(candidates: list[Candidate], ctx: ScanContext) -> Candidate | None:
    """Apply the selection precedence to decoded candidates."""
    if not candidates:
        return None
    if ctx.pointing is not None:
        pointed = select_by_pointing(candidates, ctx.pointing)
        if pointed is not None:
            return pointed
    pool = candidates
    if ctx.roi is not None:
        shortlisted = shortlist_by_roi(candidates, ctx.roi)
        if shortlisted:
            pool = shortlisted
    return min(pool, key=_tie_key)


def scan(
    img: GrayImage, ctx: ScanContext | None = None, config: ScanConfig | None = None
) -> ScanOutcome:
    """Detect, enhance-decode every candidate patch, then disambiguate."""
    ctx = ctx or ScanContext()
    config = config or ScanConfig()
    detections = tuple(detect(img, config.thumb_max))
    if not detections:
        return ScanOutcome(
            status="no_code_found",
            feedback=FEEDBACK_NO_CODE,
            selected=None,
            all_decoded=(),
            detections=(),
        )
    decoded: list[Candidate] = []
    telemetry: list[tuple[StageResult, ...]] = []
    for det in detections:
        patch, _ = crop_with_margin(img, det.box, config.margin_frac)
        payload, results = decode_patch(
            patch, config.plan, sr_resolver=config.sr_resolver, config=config.cascade
        )
        telemetry.append(tuple(results))
        if payload is not None:
            decoded.append((det, payload))
    if not decoded:
        all_small = all(det.box.area <= SMALL_PATCH_AREA for det in detections)
        return ScanOutcome(
            status="code_unclear",
            feedback=FEEDBACK_TOO_SMALL if all_small else FEEDBACK_UNCLEAR,
            selected=None,
            all_decoded=(),
            detections=detections,
            telemetry=tuple(telemetry),
        )
    chosen = disambiguate(decoded, ctx)
    return ScanOutcome(
        status="selected",
        feedback=FEEDBACK_OK,
        selected=chosen,
        all_decoded=tuple(decoded),
        detections=detections,
        telemetry=tuple(telemetry),
    )


__all__ = [
    "Candidate",
    "FEEDBACK_NO_CODE",
    "FEEDBACK_OK",
    "FEEDBACK_TOO_SMALL",
    "FEEDBACK_UNCLEAR",
    "ScanConfig",
    "ScanContext",
    "ScanOutcome",
    "disambiguate",
    "scan",
    "select_by_pointing",
    "shortlist_by_roi",
    "winning_stage",
]
