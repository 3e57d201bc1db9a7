"""Replay manifest ingestion and emotional-moment record output.

Both formats are line-oriented JSON with a fixed key order so that replay
outputs are byte-stable.

Manifest (one object per line):
    line 1   header  {"sidecar_dir":DIR-or-null,"config":{key:value,...}}
    line 2+  frame   {"t":MS,"eye":{"pupil":[a,b],"gaze":[x,y],
                      "feature":[...] | "feature_file":PATH | null,
                      "frame_size":[H1,W1]},
                      "scene":{"frame_id":ID,"size":[H2,W2]},
                      "label":CODE (optional)}

Record output (one object per line, keys in this order):
    {"t_start":..,"t_end":..,"emotion":CODE,"region":{"rect":[..],
     "feature":[..],"tag":T},"summary_tag":S,"influential_score":IS,
     "is_series":[..]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .core import (DEFAULT_SCENE_SIZE, EmotionLabel, EmotionshipRecord, EyeSample,
                   Region, SceneFrame)
from .errors import DataError


@dataclass(frozen=True)
class FrameEntry:
    eye: EyeSample
    scene: SceneFrame
    label: Optional[EmotionLabel] = None


@dataclass(frozen=True)
class Manifest:
    path: Path
    sidecar_dir: Optional[Path]
    config_overrides: Dict[str, object]
    frames: Tuple[FrameEntry, ...] = field(default_factory=tuple)


def _fail(path, lineno: int, message: str):
    raise DataError(f"{path}:{lineno}: {message}")


def _parse_pair(obj, key, lineno, path) -> Tuple[float, float]:
    val = obj.get(key)
    if (not isinstance(val, list) or len(val) != 2
            or not all(isinstance(v, (int, float)) for v in val)):
        _fail(path, lineno, f"{key!r} must be a 2-number list")
    return float(val[0]), float(val[1])


def load_manifest(path) -> Manifest:
    """Load and eagerly validate a replay manifest.

    The first invariant violation is reported with its 1-based line number;
    referenced sidecar and feature files must resolve at load time.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc
    if not lines:
        raise DataError(f"{path}:1: empty manifest (missing header line)")

    def parse_line(lineno: int) -> dict:
        try:
            obj = json.loads(lines[lineno - 1])
        except json.JSONDecodeError as exc:
            _fail(path, lineno, f"invalid JSON: {exc.msg}")
        if not isinstance(obj, dict):
            _fail(path, lineno, "expected a JSON object")
        return obj

    header = parse_line(1)
    sidecar_dir = None
    if header.get("sidecar_dir") is not None:
        sidecar_dir = (path.parent / header["sidecar_dir"]).resolve()
        if not sidecar_dir.is_dir():
            _fail(path, 1, f"sidecar directory {sidecar_dir} does not exist")
    overrides = header.get("config") or {}
    if not isinstance(overrides, dict):
        _fail(path, 1, "header 'config' must be an object")

    frames: List[FrameEntry] = []
    last_t: Optional[int] = None
    for lineno in range(2, len(lines) + 1):
        if not lines[lineno - 1].strip():
            continue
        obj = parse_line(lineno)
        t = obj.get("t")
        if not isinstance(t, int):
            _fail(path, lineno, "'t' must be an integer millisecond timestamp")
        if last_t is not None and t <= last_t:
            _fail(path, lineno, f"timestamp {t} not greater than previous {last_t}")
        last_t = t

        eye_obj = obj.get("eye")
        if not isinstance(eye_obj, dict):
            _fail(path, lineno, "'eye' must be an object")
        pupil = _parse_pair(eye_obj, "pupil", lineno, path)
        gaze = _parse_pair(eye_obj, "gaze", lineno, path)
        feature = None
        if eye_obj.get("feature") is not None:
            raw = eye_obj["feature"]
            if not isinstance(raw, list) or not all(
                    isinstance(v, (int, float)) for v in raw):
                _fail(path, lineno, "'eye.feature' must be a number list")
            feature = tuple(float(v) for v in raw)
        elif eye_obj.get("feature_file") is not None:
            fpath = path.parent / eye_obj["feature_file"]
            if not fpath.is_file():
                _fail(path, lineno, f"dangling feature reference {fpath}")
            try:
                feature = tuple(float(v) for v in fpath.read_text().split())
            except ValueError:
                _fail(path, lineno, f"malformed numbers in feature file {fpath}")
        frame_size = tuple(int(v) for v in eye_obj.get("frame_size", [240, 320]))

        scene_obj = obj.get("scene")
        if not isinstance(scene_obj, dict) or not isinstance(
                scene_obj.get("frame_id"), str):
            _fail(path, lineno, "'scene.frame_id' must be a string")
        scene_size = tuple(int(v) for v in scene_obj.get("size", DEFAULT_SCENE_SIZE))
        frame_id = scene_obj["frame_id"]
        if sidecar_dir is not None:
            sidecar = sidecar_dir / f"{frame_id}.json"
            if not sidecar.is_file():
                _fail(path, lineno, f"dangling sidecar reference {sidecar}")

        label = None
        if obj.get("label") is not None:
            if not isinstance(obj["label"], int) or not 0 <= obj["label"] <= 6:
                _fail(path, lineno, f"label {obj['label']!r} outside 0..6")
            label = EmotionLabel(obj["label"])

        try:
            entry = FrameEntry(
                eye=EyeSample(t=t, pupil=pupil, gaze=gaze, feature=feature,
                              frame_ref=frame_id, frame_size=frame_size),
                scene=SceneFrame(t=t, frame_id=frame_id, frame_size=scene_size),
                label=label)
        except DataError as exc:
            _fail(path, lineno, str(exc))
        frames.append(entry)
    return Manifest(path=path, sidecar_dir=sidecar_dir,
                    config_overrides=dict(overrides), frames=tuple(frames))


# -- record output ----------------------------------------------------------

def _record_to_obj(record: EmotionshipRecord) -> dict:
    return {
        "t_start": record.t_start,
        "t_end": record.t_end,
        "emotion": int(record.emotion),
        "region": {
            "rect": list(record.region.rect),
            "feature": list(record.region.feature),
            "tag": record.region.tag,
        },
        "summary_tag": record.summary_tag,
        "influential_score": record.influential_score,
        "is_series": list(record.is_series),
    }


def record_to_line(record: EmotionshipRecord) -> bytes:
    return json.dumps(_record_to_obj(record), separators=(",", ":"),
                      ensure_ascii=True).encode("ascii") + b"\n"


def write_records(records: Sequence[EmotionshipRecord], path) -> None:
    """One record per line; the EmotionshipRecord constructor has already
    enforced every invariant, so anything reaching this point is writable."""
    try:
        with open(path, "wb") as f:
            for record in records:
                f.write(record_to_line(record))
    except OSError as exc:
        raise DataError(f"cannot write records to {path}: {exc}") from exc


def read_records(path) -> List[EmotionshipRecord]:
    records = []
    try:
        with open(path, "rb") as f:
            lines = f.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read records from {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
        try:
            region = Region(rect=tuple(obj["region"]["rect"]),
                            feature=tuple(obj["region"]["feature"]),
                            tag=obj["region"]["tag"])
            records.append(EmotionshipRecord(
                t_start=obj["t_start"], t_end=obj["t_end"],
                emotion=EmotionLabel(obj["emotion"]), region=region,
                summary_tag=obj["summary_tag"],
                influential_score=obj["influential_score"],
                is_series=tuple(obj["is_series"])))
        except (KeyError, TypeError, ValueError, DataError) as exc:
            raise DataError(f"{path}:{lineno}: bad record: {exc}") from exc
    return records
