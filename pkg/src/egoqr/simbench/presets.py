"""Pinned synthetic corpora: seeds and parameters are versioned here so every
bench run over a preset is reproducible bit for bit."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..imaging import save_pgm
from .bench import write_manifest_line
from .degrade import DegradationSpec, synthesize_scene

MANIFEST_NAME = "manifest.jsonl"


@dataclass(frozen=True)
class SceneSpec:
    payloads: tuple[bytes, ...]
    specs: tuple[DegradationSpec, ...]
    canvas: tuple[int, int]
    seed: int


def _payload(tag: str, index: int) -> bytes:
    return f"EGO-{tag}-{index:04d}".encode("ascii")


def preset_clean() -> list[SceneSpec]:
    """Undegraded renders at assorted module sizes and versions."""
    cases = [
        # (module_px, payload_len): all fit a 576x432 canvas with quiet zones
        (4, 8), (4, 40), (4, 90), (4, 160),
        (5, 8), (5, 40), (5, 90),
        (6, 8), (6, 40), (6, 90),
        (8, 8), (8, 40),
        (10, 8), (10, 25),
        (3, 8), (3, 120), (3, 200),
        (12, 8),
    ]
    scenes = []
    for i, (module_px, text_len) in enumerate(cases):
        payload = (_payload("CLEAN", i) + b"x" * text_len)[: max(text_len, 8)]
        spec = DegradationSpec(module_px=module_px)
        scenes.append(
            SceneSpec(payloads=(payload,), specs=(spec,), canvas=(576, 432), seed=1000 + i)
        )
    return scenes


def preset_mild() -> list[SceneSpec]:
    """Mild egocentric conditions: tilt <= 25 deg, sigma <= 1.0, noise <= 8,
    symbol sides >= 120 px."""
    scenes = []
    cases = [
        # (tilt, rotation, gaussian, noise, target_px, illumination)
        (0.0, 0.0, 0.4, 4.0, 140, ("x", 0.0)),
        (8.0, 10.0, 0.6, 6.0, 150, ("x", 0.2)),
        (15.0, 30.0, 0.8, 8.0, 160, ("y", 0.3)),
        (20.0, 45.0, 0.5, 5.0, 180, ("x", 0.1)),
        (25.0, 15.0, 1.0, 8.0, 200, ("y", 0.2)),
        (12.0, 5.0, 1.0, 6.0, 130, ("x", 0.25)),
        (18.0, 25.0, 0.7, 7.0, 170, ("y", 0.15)),
        (25.0, 40.0, 0.9, 4.0, 220, ("x", 0.3)),
        (5.0, 35.0, 0.3, 8.0, 120, ("y", 0.1)),
        (22.0, 20.0, 0.6, 3.0, 190, ("x", 0.2)),
    ]
    for i, (tilt, rot, sigma, noise, target, illum) in enumerate(cases):
        for j, length in enumerate((6, 30, 70)):
            payload = _payload("MILD", i * 3 + j) + b"y" * max(0, length - 14)
            spec = DegradationSpec(
                perspective_tilt=tilt,
                rotation=rot,
                gaussian_blur=sigma,
                noise_sigma=noise,
                illumination_gradient=illum,
                module_px=8,
                target_px=target,
                background="texture" if (i + j) % 3 == 0 else "flat",
                background_seed=17 + i,
            )
            scenes.append(
                SceneSpec(
                    payloads=(payload,),
                    specs=(spec,),
                    canvas=(640, 480),
                    seed=2000 + i * 3 + j,
                )
            )
    return scenes


def preset_lowres() -> list[SceneSpec]:
    """Small codes (well under 192 px, sub-2 px modules) with softening blur;
    the regime where the upscale stages earn their keep."""
    scenes = []
    cases = [
        # (version chars, target_px, gaussian, noise)
        (2, 46, 0.5, 2.0),
        (2, 50, 0.6, 2.0),
        (2, 54, 0.7, 3.0),
        (3, 52, 0.5, 2.0),
        (3, 56, 0.6, 2.0),
        (3, 60, 0.7, 3.0),
        (2, 44, 0.4, 1.0),
        (3, 50, 0.4, 1.0),
        (2, 48, 0.8, 2.0),
        (3, 58, 0.8, 2.0),
        (2, 42, 0.5, 1.0),
        (3, 54, 0.55, 1.5),
    ]
    for i, (version_hint, target, sigma, noise) in enumerate(cases):
        length = 8 if version_hint == 2 else 30  # pushes encode into v2 / v3
        payload = _payload("LOWRES", i) + b"z" * max(0, length - 15)
        spec = DegradationSpec(
            gaussian_blur=sigma,
            noise_sigma=noise,
            module_px=8,
            target_px=target,
            ec_level="M",
        )
        scenes.append(
            SceneSpec(payloads=(payload,), specs=(spec,), canvas=(576, 432), seed=3000 + i)
        )
    return scenes


def preset_detect_sweep() -> list[SceneSpec]:
    """Detection recall sweep: clean-to-mild, codes >= 30x30 thumbnail px,
    rotations {0,15,30,45} deg, tilt <= 25 deg."""
    scenes = []
    index = 0
    for rotation in (0.0, 15.0, 30.0, 45.0):
        for tilt in (0.0, 12.0, 25.0):
            for target in (36, 48, 72, 108):
                payload = _payload("DET", index)
                spec = DegradationSpec(
                    rotation=rotation,
                    perspective_tilt=tilt,
                    module_px=8,
                    target_px=target,
                    gaussian_blur=0.3,
                )
                scenes.append(
                    SceneSpec(
                        payloads=(payload,),
                        specs=(spec,),
                        canvas=(576, 432),
                        seed=4000 + index,
                    )
                )
                index += 1
    return scenes


def preset_size_sweep() -> list[SceneSpec]:
    """Fixed mild degradation across a wide size ladder; feeds the size curve."""
    scenes = []
    sizes = (40, 48, 56, 64, 72, 84, 96, 110, 128, 150, 180, 220, 260, 300)
    for i, target in enumerate(sizes):
        for j in range(2):
            payload = _payload("SIZE", i * 2 + j)
            spec = DegradationSpec(
                perspective_tilt=10.0,
                rotation=15.0 * j,
                gaussian_blur=0.8,
                noise_sigma=4.0,
                module_px=8,
                target_px=target,
            )
            scenes.append(
                SceneSpec(
                    payloads=(payload,),
                    specs=(spec,),
                    canvas=(640, 480),
                    seed=5000 + i * 2 + j,
                )
            )
    return scenes


PRESETS = {
    "clean": preset_clean,
    "mild": preset_mild,
    "lowres": preset_lowres,
    "detect_sweep": preset_detect_sweep,
    "size_sweep": preset_size_sweep,
}


def write_corpus(scenes: list[SceneSpec], out_dir: str | Path) -> Path:
    """Synthesize scenes to PGM files plus a JSONL manifest; returns its path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    for i, scene in enumerate(scenes):
        img, truths = synthesize_scene(
            list(scene.payloads), list(scene.specs), scene.canvas, scene.seed
        )
        name = f"scene{i:04d}.pgm"
        (out_dir / name).write_bytes(save_pgm(img))
        lines.append(
            write_manifest_line(name, truths, list(scene.specs), scene.canvas, scene.seed)
        )
    manifest = out_dir / MANIFEST_NAME
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest
