"""Attention-event detection from the historical gaze trajectory.

A dispersion-based (I-DT style) classifier labels each trailing window of
gaze points as fixation, smooth pursuit, or saccade.  An attention event is
the temporal transition saccade -> (fixation | smooth pursuit) sustained for
at least the configured minimum duration.  Detection is causal and fully
deterministic.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

from .config import Config
from .errors import DataError, InsufficientDataError

Point = Tuple[float, float]


class Movement(Enum):
    SACCADE = "saccade"
    SMOOTH_PURSUIT = "smooth_pursuit"
    FIXATION = "fixation"


ATTENTION_MOVEMENTS = (Movement.FIXATION, Movement.SMOOTH_PURSUIT)


@dataclass(frozen=True)
class GazeWindow:
    """Time-ordered (t_ms, gaze) pairs; timestamps strictly increasing."""

    samples: Tuple[Tuple[int, Point], ...]

    def __post_init__(self):
        ts = [t for t, _ in self.samples]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise DataError("gaze window timestamps must be strictly increasing")

    @property
    def span_ms(self) -> int:
        if not self.samples:
            return 0
        return self.samples[-1][0] - self.samples[0][0]


@dataclass(frozen=True)
class AttentionEvent:
    t_start: int
    t_end: int
    kind: Movement
    dispersion: float


def _dispersion(points: Sequence[Point]) -> float:
    """Max pairwise Euclidean distance; quadratic but windows are tiny."""
    worst = 0.0
    for i in range(len(points)):
        xi, yi = points[i]
        for j in range(i + 1, len(points)):
            d = math.hypot(points[j][0] - xi, points[j][1] - yi)
            if d > worst:
                worst = d
    return worst


def _mean_speed(samples: Sequence[Tuple[int, Point]]) -> float:
    """Mean gaze speed in normalized units per second."""
    total = 0.0
    for (t0, p0), (t1, p1) in zip(samples, samples[1:]):
        dt = (t1 - t0) / 1000.0
        total += math.hypot(p1[0] - p0[0], p1[1] - p0[1]) / dt
    return total / (len(samples) - 1)


def classify_movement(window: GazeWindow, cfg: Config) -> Movement:
    """Classify one window by dispersion and mean speed thresholds."""
    if len(window.samples) < 2:
        raise InsufficientDataError(
            f"need >= 2 samples to classify movement, got {len(window.samples)}"
        )
    disp = _dispersion([p for _, p in window.samples])
    speed = _mean_speed(window.samples)
    if disp <= cfg["gaze.rho_fix"] and speed <= cfg["gaze.v_fix"]:
        return Movement.FIXATION
    if disp <= cfg["gaze.rho_sp"] and cfg["gaze.v_fix"] < speed <= cfg["gaze.v_sp"]:
        return Movement.SMOOTH_PURSUIT
    return Movement.SACCADE


@dataclass(frozen=True)
class DetectorState:
    """Per-sample detector output consumed by the pipeline."""

    movement: Optional[Movement]  # None until the window fills
    attention_active: bool  # sustained >= min_duration and still running


class AttentionDetector:
    """Single-stream, causal saccade->pursuit/fixation transition detector.

    One instance per stream; feed samples through :meth:`update` in time
    order, then call :meth:`finish` to flush a trailing event.
    """

    def __init__(self, cfg: Config):
        self._cfg = cfg
        self._window: deque = deque(maxlen=int(cfg["gaze.window"]))
        self._last_t: Optional[int] = None
        self._prev_movement: Optional[Movement] = None
        # current attention run bookkeeping
        self._run_start: Optional[int] = None
        self._run_end: Optional[int] = None
        self._run_entered_from_saccade = False
        self._run_kinds: List[Movement] = []
        self._run_dispersion = 0.0
        self._events: List[AttentionEvent] = []

    def update(self, t: int, gaze: Point) -> DetectorState:
        if self._last_t is not None and t <= self._last_t:
            raise DataError(f"non-increasing gaze timestamp {t} after {self._last_t}")
        self._last_t = t
        self._window.append((t, gaze))
        if len(self._window) < self._window.maxlen:
            return DetectorState(movement=None, attention_active=False)
        window = GazeWindow(samples=tuple(self._window))
        movement = classify_movement(window, self._cfg)
        if movement in ATTENTION_MOVEMENTS:
            if self._run_start is None:
                self._run_start = t
                self._run_entered_from_saccade = self._prev_movement is Movement.SACCADE
                self._run_kinds = []
                self._run_dispersion = 0.0
            self._run_end = t
            self._run_kinds.append(movement)
            self._run_dispersion = max(
                self._run_dispersion, _dispersion([p for _, p in window.samples])
            )
        else:
            self._close_run()
        self._prev_movement = movement
        return DetectorState(movement=movement, attention_active=self._attention_active())

    def _attention_active(self) -> bool:
        if self._run_start is None or not self._run_entered_from_saccade:
            return False
        return (self._run_end - self._run_start) >= self._cfg["gaze.min_duration_ms"]

    def _close_run(self) -> None:
        if self._run_start is not None and self._run_entered_from_saccade:
            duration = self._run_end - self._run_start
            if duration >= self._cfg["gaze.min_duration_ms"]:
                fixations = sum(1 for k in self._run_kinds if k is Movement.FIXATION)
                kind = (Movement.FIXATION
                        if fixations * 2 >= len(self._run_kinds)
                        else Movement.SMOOTH_PURSUIT)
                self._events.append(AttentionEvent(
                    t_start=self._run_start, t_end=self._run_end,
                    kind=kind, dispersion=self._run_dispersion))
        self._run_start = None
        self._run_end = None
        self._run_entered_from_saccade = False
        self._run_kinds = []

    def finish(self) -> List[AttentionEvent]:
        """Flush any open run and return all completed events."""
        self._close_run()
        return list(self._events)

    def pop_events(self) -> List[AttentionEvent]:
        events, self._events = list(self._events), []
        return events


def detect_attention_events(samples: Iterable[Tuple[int, Point]],
                            cfg: Config) -> List[AttentionEvent]:
    """Run the detector over a full (t_ms, gaze) stream and return its events."""
    detector = AttentionDetector(cfg)
    for t, gaze in samples:
        detector.update(t, gaze)
    return detector.finish()
