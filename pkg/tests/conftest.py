"""Shared fixture builders: desk-scale configs, model archives, sidecar
directories, and replay manifests small enough to reason about by hand."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from emoship.archive import TensorArchive
from emoship.config import Config
from emoship.core import Region
from emoship.fusion import FusionHead

# Desk-scale dimensions used across the suite: small enough for
# finite-difference checks, large enough to exercise every code path.
DESK = {
    "fusion.d_vis": 4,
    "fusion.d_eye": 6,
    "fusion.r_max": 3,
    "fusion.se_reduction": 2,
    "roi.max_candidates": 3,
}


def desk_config(**overrides) -> Config:
    cfg = Config()
    for key, value in {**DESK, **overrides}.items():
        cfg.set(key, value)
    return cfg


@pytest.fixture
def cfg() -> Config:
    return desk_config()


def desk_head(seed: int = 0, scale: float = 0.1) -> FusionHead:
    return FusionHead.random(
        d_vis=DESK["fusion.d_vis"], d_eye=DESK["fusion.d_eye"],
        r_max=DESK["fusion.r_max"], se_reduction=DESK["fusion.se_reduction"],
        seed=seed, scale=scale)


def signal_trigger_weights(d_eye: int = DESK["fusion.d_eye"], gain: float = 8.0):
    """Trigger weights reading the first feature component: positive means
    non-neutral with high confidence, negative means neutral."""
    W = np.zeros((2, d_eye))
    W[1, 0] = gain
    b = np.zeros(2)
    return W, b


def make_models_archive(path: Path, head: FusionHead = None) -> Path:
    head = head or desk_head()
    archive = head.to_archive()
    W, b = signal_trigger_weights()
    archive.add("trigger.W", W)
    archive.add("trigger.b", b)
    archive.save(path)
    return path


def three_regions(d_vis: int = DESK["fusion.d_vis"]):
    """dog at the center, cat upper-left-ish, car lower-right-ish."""
    def feat(seed):
        return tuple(np.random.default_rng(seed).standard_normal(d_vis))
    return [
        Region(rect=(0.5, 0.5, 0.2, 0.2), feature=feat(1), tag="dog"),
        Region(rect=(0.2, 0.8, 0.1, 0.1), feature=feat(2), tag="cat"),
        Region(rect=(0.8, 0.2, 0.1, 0.1), feature=feat(3), tag="car"),
    ]


def region_to_obj(region: Region) -> dict:
    return {"rect": list(region.rect), "feature": list(region.feature),
            "tag": region.tag}


def write_sidecar(directory: Path, frame_id: str, regions, gt_attended=None):
    obj = {"op": "regions", "frame_id": frame_id,
           "regions": [region_to_obj(r) for r in regions]}
    if gt_attended is not None:
        obj["gt_attended"] = gt_attended
    directory.mkdir(parents=True, exist_ok=True)
    (directory / f"{frame_id}.json").write_text(
        json.dumps(obj, separators=(",", ":")) + "\n", encoding="utf-8")


def planted_trace(n_saccade: int = 15, n_still: int = 60, dt: int = 33,
                  still=(0.5, 0.5), noise_sigma: float = 0.0, seed: int = 0):
    """(t, gaze) pairs: alternating large jumps, then a stationary tail."""
    rng = np.random.default_rng(seed)
    out = []
    t = 0
    for i in range(n_saccade):
        base = (0.1, 0.1) if i % 2 == 0 else (0.9, 0.9)
        out.append((t, base))
        t += dt
    for _ in range(n_still):
        gx = min(1.0, max(0.0, still[0] + rng.normal(0.0, noise_sigma)))
        gy = min(1.0, max(0.0, still[1] + rng.normal(0.0, noise_sigma)))
        out.append((t, (gx, gy)))
        t += dt
    return out


def write_pipeline_fixture(tmp_path: Path, nonneutral_frames=range(31, 51),
                           n_frames: int = 75, seed: int = 0):
    """A manifest + sidecars where exactly one capture window should occur.

    Gaze: 15 saccade frames then stationary; the trigger fires on the frames
    listed in ``nonneutral_frames``.  Returns (manifest_path, sidecar_dir).
    """
    trace = planted_trace(n_saccade=15, n_still=n_frames - 15, seed=seed)
    sidecar_dir = tmp_path / "sidecars"
    regions = three_regions()
    lines = [json.dumps({"sidecar_dir": "sidecars", "config": dict(DESK)},
                        separators=(",", ":"))]
    rng = np.random.default_rng(seed + 1)
    for i, (t, gaze) in enumerate(trace):
        frame_id = f"f{i:03d}"
        write_sidecar(sidecar_dir, frame_id, regions, gt_attended=0)
        lead = 1.0 if i in nonneutral_frames else -1.0
        feature = [lead] + [float(v) for v in rng.standard_normal(3) * 0.01]
        lines.append(json.dumps({
            "t": t,
            "eye": {"pupil": [0.3, 0.4], "gaze": [gaze[0], gaze[1]],
                    "feature": feature},
            "scene": {"frame_id": frame_id},
        }, separators=(",", ":")))
    manifest = tmp_path / "manifest.jsonl"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest, sidecar_dir


@pytest.fixture
def pipeline_fixture(tmp_path):
    return write_pipeline_fixture(tmp_path)
