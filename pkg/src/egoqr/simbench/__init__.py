"""Synthetic degradation corpus generation and the evaluation harness."""

from .bench import (
    BenchConfig,
    BenchRecord,
    BenchReport,
    SizeBucket,
    StageAblation,
    ablate_stages,
    evaluate_scene,
    read_manifest,
    records_to_csv,
    report_to_json,
    run_bench,
    size_curve_to_csv,
    summarize,
    write_manifest_line,
    write_report,
)
from .degrade import DegradationSpec, GroundTruth, degrade_patch, synthesize_scene
from .presets import PRESETS, SceneSpec, write_corpus

__all__ = [
    "BenchConfig",
    "BenchRecord",
    "BenchReport",
    "DegradationSpec",
    "GroundTruth",
    "PRESETS",
    "SceneSpec",
    "SizeBucket",
    "StageAblation",
    "ablate_stages",
    "degrade_patch",
    "evaluate_scene",
    "read_manifest",
    "records_to_csv",
    "report_to_json",
    "run_bench",
    "size_curve_to_csv",
    "summarize",
    "synthesize_scene",
    "write_corpus",
    "write_manifest_line",
    "write_report",
]
