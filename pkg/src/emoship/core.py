"""Domain types shared by every stage of the pipeline.

All spatial quantities live in normalized [0,1]^2 scene coordinates; pixel
coordinates appear only at I/O boundaries (see ``region_from_pixels`` /
``region_to_pixels``).  Every type here is immutable after construction and
safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional, Sequence, Tuple

from .errors import DataError

DEFAULT_D_EYE_RAW = 128
DEFAULT_D_VIS = 2048
DEFAULT_SCENE_SIZE = (960, 1280)  # (H2, W2)


class EmotionLabel(IntEnum):
    """Seven-way emotion code; 0 is the unique neutral value.

    Ties in argmax / majority votes resolve to the lowest code, so this
    ordering is part of the behavioural contract.
    """

    NEUTRALITY = 0
    HAPPINESS = 1
    SURPRISE = 2
    ANGER = 3
    FEAR = 4
    DISGUST = 5
    SADNESS = 6

    @property
    def is_neutral(self) -> bool:
        return self is EmotionLabel.NEUTRALITY

    @property
    def is_positive(self) -> bool:
        return self in POSITIVE_EMOTIONS

    @property
    def is_negative(self) -> bool:
        return self in NEGATIVE_EMOTIONS


POSITIVE_EMOTIONS = frozenset({EmotionLabel.HAPPINESS, EmotionLabel.SURPRISE})
NEGATIVE_EMOTIONS = frozenset(
    {EmotionLabel.ANGER, EmotionLabel.FEAR, EmotionLabel.DISGUST, EmotionLabel.SADNESS}
)
NON_NEUTRAL_EMOTIONS = tuple(e for e in EmotionLabel if not e.is_neutral)


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


@dataclass(frozen=True)
class EyeSample:
    """One timestamped eye observation.

    ``feature`` holds a precomputed eye-feature vector when available;
    otherwise ``frame_ref`` points at a raw eye frame for a pluggable
    extractor.  Gaze is clamped to [0,1]^2 at construction.
    """

    t: int  # ms
    pupil: Tuple[float, float]
    gaze: Tuple[float, float]
    feature: Optional[Tuple[float, ...]] = None
    frame_ref: Optional[str] = None
    frame_size: Tuple[int, int] = (240, 320)  # (H1, W1)

    def __post_init__(self):
        gx, gy = self.gaze
        if not (math.isfinite(gx) and math.isfinite(gy)):
            raise DataError(f"gaze components must be finite, got {self.gaze}")
        object.__setattr__(self, "gaze", (_clamp01(gx), _clamp01(gy)))
        if self.pupil[0] < 0 or self.pupil[1] < 0:
            raise DataError(f"pupil components must be >= 0, got {self.pupil}")
        if self.feature is not None:
            object.__setattr__(self, "feature", tuple(float(v) for v in self.feature))


@dataclass(frozen=True)
class SceneFrame:
    """One world-camera frame, referenced by an opaque id (no image decoding)."""

    t: int  # ms
    frame_id: str
    frame_size: Tuple[int, int] = DEFAULT_SCENE_SIZE  # (H2, W2)

    def __post_init__(self):
        h, w = self.frame_size
        if h <= 0 or w <= 0:
            raise DataError(f"frame_size must be positive, got {self.frame_size}")


@dataclass(frozen=True)
class Region:
    """A candidate RoI: normalized rect (cx, cy, w, h), visual feature, tag."""

    rect: Tuple[float, float, float, float]
    feature: Tuple[float, ...]
    tag: str

    def __post_init__(self):
        cx, cy, w, h = self.rect
        if w <= 0 or h <= 0:
            raise DataError(f"region width/height must be positive, got {self.rect}")
        # must intersect the unit square
        if cx + w / 2 <= 0 or cx - w / 2 >= 1 or cy + h / 2 <= 0 or cy - h / 2 >= 1:
            raise DataError(f"region {self.rect} does not intersect [0,1]^2")
        object.__setattr__(self, "rect", tuple(float(v) for v in self.rect))
        object.__setattr__(self, "feature", tuple(float(v) for v in self.feature))

    @property
    def center(self) -> Tuple[float, float]:
        return (self.rect[0], self.rect[1])

    def validate_feature_dim(self, d_vis: int) -> None:
        if len(self.feature) != d_vis:
            raise DataError(
                f"region feature length {len(self.feature)} != configured D_vis {d_vis}"
            )


def region_from_pixels(rect_px: Tuple[float, float, float, float],
                       frame_size: Tuple[int, int],
                       feature: Sequence[float], tag: str) -> Region:
    """Build a Region from a pixel-space (cx, cy, w, h) rect; frame_size is (H, W)."""
    h, w = frame_size
    cx, cy, rw, rh = rect_px
    return Region(rect=(cx / w, cy / h, rw / w, rh / h), feature=tuple(feature), tag=tag)


def region_to_pixels(region: Region, frame_size: Tuple[int, int]) -> Tuple[float, float, float, float]:
    h, w = frame_size
    cx, cy, rw, rh = region.rect
    return (cx * w, cy * h, rw * w, rh * h)


@dataclass(frozen=True)
class EmotionshipRecord:
    """One emotional moment: emotion, attended region, summary tag, influential score.

    ``influential_score`` is always the mean of ``is_series``; both are
    validated at construction.
    """

    t_start: int
    t_end: int
    emotion: EmotionLabel
    region: Region
    summary_tag: str
    influential_score: float
    is_series: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.emotion.is_neutral:
            raise DataError("record emotion must be non-neutral")
        if self.t_start > self.t_end:
            raise DataError(f"t_start {self.t_start} > t_end {self.t_end}")
        series = tuple(float(v) for v in self.is_series)
        if not series:
            raise DataError("is_series must be non-empty")
        for v in series:
            if not (0.0 < v < 1.0):
                raise DataError(f"influential score {v} outside (0,1)")
        mean = sum(series) / len(series)
        if abs(mean - self.influential_score) > 1e-9:
            raise DataError(
                f"influential_score {self.influential_score} != mean of series {mean}"
            )
        object.__setattr__(self, "is_series", series)

    @classmethod
    def from_series(cls, t_start, t_end, emotion, region, summary_tag, is_series):
        series = tuple(float(v) for v in is_series)
        mean = sum(series) / len(series) if series else 0.0
        return cls(t_start=t_start, t_end=t_end, emotion=emotion, region=region,
                   summary_tag=summary_tag, influential_score=mean, is_series=series)
