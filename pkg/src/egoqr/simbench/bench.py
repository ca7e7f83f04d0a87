"""Evaluation harness: per-code outcome records, rate report, size curve.

A code counts as detected when some detection overlaps its truth box at
IoU >= 0.5, and as successfully read when one of those detections decodes to
the exact truth payload. The decoding rate is reported among detected codes,
so detection_rate * decoding_rate reproduces the end-to-end rate by
construction. Disambiguation plays no role here: every candidate is scored.
"""

from __future__ import annotations

import base64
import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..detector import detect
from ..enhancer import CascadeConfig, EnhancementPlan, build_default_plan, winning_stage
from ..enhancer import decode_patch
from ..imaging import BoundingBox, GrayImage, crop_with_margin, load_pgm
from .degrade import DegradationSpec, GroundTruth

IOU_THRESHOLD = 0.5
SMALL_THUMB_SIDE = 15  # paper-scale limit below which detection is not expected
SIZE_BUCKET_EDGES = (0, 2_500, 5_625, 10_000, 22_500, 40_000, 90_000, None)


@dataclass(frozen=True)
class BenchConfig:
    plan: EnhancementPlan = field(default_factory=build_default_plan)
    cascade: CascadeConfig = field(default_factory=CascadeConfig)
    thumb_max: tuple[int, int] = (576, 432)
    margin_frac: float = 0.125
    sr_resolver: object | None = None
    iou_threshold: float = IOU_THRESHOLD


@dataclass(frozen=True)
class BenchRecord:
    code_id: str
    payload: bytes
    patch_area: int
    detected: bool
    decoded: bool
    matched: bool
    winning_stage: int | None
    failure_reason: str

    def __post_init__(self) -> None:
        if self.matched and not self.decoded:
            raise ValueError("matched implies decoded")
        if self.decoded and not self.detected:
            raise ValueError("decoded implies detected")


@dataclass(frozen=True)
class SizeBucket:
    min_sqpx: int
    max_sqpx: int | None  # None = unbounded
    n: int
    success_rate: float


@dataclass(frozen=True)
class BenchReport:
    total: int
    detected: int
    decoded: int
    matched: int
    detection_rate: float
    decoding_rate: float
    end_to_end_rate: float
    stage_wins: dict[int, int]
    size_buckets: tuple[SizeBucket, ...]

    def rate_split_at(self, area: int = 10_000) -> tuple[float | None, float | None]:
        """(success rate above `area`, success rate at or below). None if empty."""
        above_n = above_ok = below_n = below_ok = 0
        for bucket in self.size_buckets:
            if bucket.min_sqpx >= area:
                above_n += bucket.n
                above_ok += round(bucket.success_rate * bucket.n)
            elif bucket.max_sqpx is not None and bucket.max_sqpx <= area:
                below_n += bucket.n
                below_ok += round(bucket.success_rate * bucket.n)
        above = above_ok / above_n if above_n else None
        below = below_ok / below_n if below_n else None
        return above, below


@dataclass(frozen=True)
class SceneEntry:
    image_path: Path
    truths: list[GroundTruth]
    scene_id: str


def write_manifest_line(
    image_path: str,
    truths: list[GroundTruth],
    specs: list[DegradationSpec],
    canvas: tuple[int, int],
    seed: int,
) -> str:
    codes = [
        {
            "payload_b64": base64.b64encode(t.payload).decode("ascii"),
            "box": [t.box.x_min, t.box.y_min, t.box.x_max, t.box.y_max],
        }
        for t in truths
    ]
    record = {
        "image_path": image_path,
        "codes": codes,
        "spec": {"canvas": list(canvas), "degradations": [s.to_dict() for s in specs]},
        "seed": seed,
    }
    return json.dumps(record, sort_keys=True)


def read_manifest(manifest_path: str | Path) -> list[SceneEntry]:
    manifest_path = Path(manifest_path)
    entries: list[SceneEntry] = []
    base = manifest_path.parent
    with open(manifest_path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            truths = [
                GroundTruth(
                    payload=base64.b64decode(code["payload_b64"]),
                    box=BoundingBox(*code["box"]),
                )
                for code in record["codes"]
            ]
            path = Path(record["image_path"])
            if not path.is_absolute():
                path = base / path
            entries.append(SceneEntry(image_path=path, truths=truths, scene_id=f"scene{line_no:04d}"))
    return entries


def _thumbnail_side(box: BoundingBox, img_w: int, img_h: int, thumb_max: tuple[int, int]) -> float:
    scale = min(1.0, thumb_max[0] / img_w, thumb_max[1] / img_h)
    return max(box.width, box.height) * scale


def evaluate_scene(
    img: GrayImage, truths: list[GroundTruth], config: BenchConfig, scene_id: str
) -> list[BenchRecord]:
    detections = detect(img, config.thumb_max)
    decodes = []
    for det in detections:
        patch, _ = crop_with_margin(img, det.box, config.margin_frac)
        payload, results = decode_patch(
            patch, config.plan, sr_resolver=config.sr_resolver, config=config.cascade
        )
        decodes.append((det, payload, results))

    records = []
    for idx, truth in enumerate(truths):
        hits = [
            (det, payload, results)
            for det, payload, results in decodes
            if det.box.iou(truth.box) >= config.iou_threshold
        ]
        detected = bool(hits)
        decoded = any(payload is not None for _, payload, _ in hits)
        match = next(
            (
                (payload, results)
                for _, payload, results in hits
                if payload is not None and payload.data == truth.payload
            ),
            None,
        )
        if match is not None:
            reason = ""
            stage = winning_stage(list(match[1]))
        elif decoded:
            reason = "payload_mismatch"
            stage = None
        elif detected:
            reason = "decode_failed"
            stage = None
        else:
            small = _thumbnail_side(truth.box, img.width, img.height, config.thumb_max)
            reason = "not_detected_small" if small <= SMALL_THUMB_SIDE else "not_detected"
            stage = None
        records.append(
            BenchRecord(
                code_id=f"{scene_id}#{idx}",
                payload=truth.payload,
                patch_area=truth.box.area,
                detected=detected,
                decoded=decoded,
                matched=match is not None,
                winning_stage=stage,
                failure_reason=reason,
            )
        )
    return records


def summarize(records: list[BenchRecord]) -> BenchReport:
    total = len(records)
    detected = sum(r.detected for r in records)
    decoded = sum(r.decoded for r in records)
    matched = sum(r.matched for r in records)
    stage_wins: dict[int, int] = {}
    for r in records:
        if r.winning_stage is not None:
            stage_wins[r.winning_stage] = stage_wins.get(r.winning_stage, 0) + 1
    buckets = []
    for lo, hi in zip(SIZE_BUCKET_EDGES[:-1], SIZE_BUCKET_EDGES[1:]):
        members = [
            r for r in records if r.patch_area > lo and (hi is None or r.patch_area <= hi)
        ]
        rate = sum(r.matched for r in members) / len(members) if members else 0.0
        buckets.append(SizeBucket(min_sqpx=lo, max_sqpx=hi, n=len(members), success_rate=rate))
    return BenchReport(
        total=total,
        detected=detected,
        decoded=decoded,
        matched=matched,
        detection_rate=detected / total if total else 0.0,
        decoding_rate=matched / detected if detected else 0.0,
        end_to_end_rate=matched / total if total else 0.0,
        stage_wins=stage_wins,
        size_buckets=tuple(buckets),
    )


def run_bench(
    manifest_path: str | Path, config: BenchConfig | None = None
) -> tuple[BenchReport, list[BenchRecord]]:
    """Evaluate every manifest scene; deterministic for a fixed config."""
    config = config or BenchConfig()
    records: list[BenchRecord] = []
    for entry in read_manifest(manifest_path):
        img = load_pgm(entry.image_path.read_bytes())
        records.extend(evaluate_scene(img, entry.truths, config, entry.scene_id))
    return summarize(records), records


@dataclass(frozen=True)
class StageAblation:
    stage_index: int
    label: str
    wins: int


def ablate_stages(
    manifest_path: str | Path, config: BenchConfig | None = None
) -> tuple[BenchReport, list[BenchRecord], list[StageAblation]]:
    """Marginal recoveries per stage: codes whose first success was that stage."""
    config = config or BenchConfig()
    report, records = run_bench(manifest_path, config)
    table = [
        StageAblation(
            stage_index=i,
            label=stage.describe(),
            wins=report.stage_wins.get(i, 0),
        )
        for i, stage in enumerate(config.plan.stages)
    ]
    return report, records, table


# ---------------------------------------------------------------------------
# Serialization: JSON summary plus per-record and size-curve CSVs
# ---------------------------------------------------------------------------

def report_to_json(report: BenchReport) -> str:
    payload = {
        "schema": 1,
        "total": report.total,
        "detected": report.detected,
        "decoded": report.decoded,
        "matched": report.matched,
        "detection_rate": report.detection_rate,
        "decoding_rate": report.decoding_rate,
        "end_to_end_rate": report.end_to_end_rate,
        "stage_wins": {str(k): v for k, v in sorted(report.stage_wins.items())},
        "size_buckets": [
            {
                "bucket_min_sqpx": b.min_sqpx,
                "bucket_max_sqpx": b.max_sqpx,
                "n": b.n,
                "success_rate": b.success_rate,
            }
            for b in report.size_buckets
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def records_to_csv(records: list[BenchRecord]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        [
            "code_id",
            "payload_b64",
            "patch_area",
            "detected",
            "decoded",
            "matched",
            "winning_stage",
            "failure_reason",
        ]
    )
    for r in records:
        writer.writerow(
            [
                r.code_id,
                base64.b64encode(r.payload).decode("ascii"),
                r.patch_area,
                int(r.detected),
                int(r.decoded),
                int(r.matched),
                "" if r.winning_stage is None else r.winning_stage,
                r.failure_reason,
            ]
        )
    return out.getvalue()


def size_curve_to_csv(report: BenchReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["bucket_min_sqpx", "bucket_max_sqpx", "n", "success_rate"])
    for b in report.size_buckets:
        writer.writerow(
            [b.min_sqpx, "" if b.max_sqpx is None else b.max_sqpx, b.n, f"{b.success_rate:.6f}"]
        )
    return out.getvalue()


def write_report(report: BenchReport, records: list[BenchRecord], out_dir: str | Path) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": out_dir / "report.json",
        "records": out_dir / "records.csv",
        "size_curve": out_dir / "size_curve.csv",
    }
    paths["report"].write_text(report_to_json(report) + "\n", encoding="utf-8")
    paths["records"].write_text(records_to_csv(records), encoding="utf-8")
    paths["size_curve"].write_text(size_curve_to_csv(report), encoding="utf-8")
    return {k: str(v) for k, v in paths.items()}
