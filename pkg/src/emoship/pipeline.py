"""Deterministic replay of the full workflow over a manifest stream.

Per frame, in order: gaze detector update (always-on time accrues); within a
sustained attention event the eye feature + trigger run (eye-network time
accrues); on a non-neutral trigger a capture window opens (world-camera time
accrues, provider regions are fetched and cached per frame id, candidates /
attended region / caption resolve, fusion emits a per-frame emotion and
influential score).  A window closes after the configured streak of neutral
frames or when the attention event ends, whichever comes first; the emitted
record aggregates the window by majority emotion, mean influential score,
and modal attended region.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .config import Config
from .core import EmotionLabel, EmotionshipRecord, Region
from .dataio import Manifest
from .embedding import EmbeddingStore
from .errors import EmoshipError, ProtocolError, ProviderUnavailableError
from .eyefeat import EyeFeatureExtractor, TriggerModel, classify_neutral, extract_eye_feature
from .fusion import FusionHead, fuse_classify
from .gaze import AttentionDetector
from .metrics import majority_vote
from .providers import ProviderClient, fetch_regions
from .roiselect import select_attended, select_candidates, summarize
from .energy import UsageLedger


@dataclass(frozen=True)
class PipelineModels:
    trigger: TriggerModel
    head: FusionHead
    extractor: EyeFeatureExtractor


@dataclass
class Diagnostics:
    frames: int = 0
    attention_frames: int = 0
    capturing_frames: int = 0
    windows_opened: int = 0
    records_emitted: int = 0
    incomplete_windows: int = 0
    skipped_empty_region_frames: int = 0
    unlabeled_frames: int = 0

    def to_text(self) -> str:
        lines = [f"{name} = {getattr(self, name)}" for name in (
            "frames", "attention_frames", "capturing_frames", "windows_opened",
            "records_emitted", "incomplete_windows",
            "skipped_empty_region_frames", "unlabeled_frames")]
        return "\n".join(lines) + "\n"


@dataclass
class _OpenWindow:
    t_start: int
    t_end: int
    neutral_streak: int = 0
    emotions: List[EmotionLabel] = field(default_factory=list)
    is_series: List[float] = field(default_factory=list)
    # per attended-region key: (count, first_position, region, caption)
    attended: Dict[Tuple, Tuple[int, int, Region, str]] = field(default_factory=dict)
    failed: bool = False

    def note_attended(self, region: Region, caption: str) -> None:
        key = (region.rect, region.tag)
        if key in self.attended:
            count, first, reg, cap = self.attended[key]
            self.attended[key] = (count + 1, first, reg, cap)
        else:
            self.attended[key] = (1, len(self.attended), region, caption)

    def modal_attended(self) -> Tuple[Region, str]:
        best = min(self.attended.values(), key=lambda v: (-v[0], v[1]))
        return best[2], best[3]


class PipelineRun:
    """Single-stream pipeline execution; owns its detector, ledger, cache."""

    def __init__(self, models: PipelineModels, provider: ProviderClient,
                 store: EmbeddingStore, cfg: Config):
        self.models = models
        self.provider = provider
        self.store = store
        self.cfg = cfg
        self.detector = AttentionDetector(cfg)
        self.ledger = UsageLedger()
        self.diagnostics = Diagnostics()
        self.records: List[EmotionshipRecord] = []
        self.is_points: List[Tuple[int, float]] = []  # (t, IS) for the CSV report
        self._regions_cache: Dict[str, List[Region]] = {}
        self._window: Optional[_OpenWindow] = None
        self._provider_ever_ok = False

    # -- window management --------------------------------------------------

    def _close_window(self) -> None:
        window, self._window = self._window, None
        if window is None:
            return
        if window.failed or not window.emotions or not window.attended:
            self.diagnostics.incomplete_windows += 1
            return
        region, caption = window.modal_attended()
        record = EmotionshipRecord.from_series(
            t_start=window.t_start, t_end=window.t_end,
            emotion=majority_vote(window.emotions), region=region,
            summary_tag=caption, is_series=window.is_series)
        self.records.append(record)
        self.diagnostics.records_emitted += 1

    def _capture_frame(self, entry) -> None:
        """Provider + fusion chain for one capturing frame."""
        window = self._window
        window.t_end = entry.scene.t
        frame_id = entry.scene.frame_id
        d_vis = self.models.head.d_vis
        try:
            if frame_id not in self._regions_cache:
                self._regions_cache[frame_id] = fetch_regions(
                    entry.scene, self.provider, d_vis)
            regions = self._regions_cache[frame_id]
            if not regions:
                self.diagnostics.skipped_empty_region_frames += 1
                return
            cands = select_candidates(
                regions, entry.eye.gaze, frame_id=frame_id,
                max_candidates=self.cfg["roi.max_candidates"])
            attended, _, _ = select_attended(
                cands, self.provider, self.store, self.cfg["roi.question"])
            caption = summarize(cands, self.provider)
            self._provider_ever_ok = True
        except (ProviderUnavailableError, ProtocolError):
            if not self._provider_ever_ok:
                raise  # provider never worked: fatal at startup
            window.failed = True
            self._close_window()
            return
        feature = extract_eye_feature(entry.eye, self.models.extractor)
        out = fuse_classify(feature, cands, self.models.head)
        window.emotions.append(out.emotion)
        window.is_series.append(out.influential_score)
        window.note_attended(attended, caption)
        self.is_points.append((entry.scene.t, out.influential_score))

    # -- main loop -----------------------------------------------------------

    def run(self, manifest: Manifest) -> None:
        frames = manifest.frames
        off_streak = int(self.cfg["pipeline.off_streak"])
        for i, entry in enumerate(frames):
            t = entry.eye.t
            if i == 0:
                dt = frames[1].eye.t - t if len(frames) > 1 else 0
            else:
                dt = t - frames[i - 1].eye.t
            self.diagnostics.frames += 1
            if entry.label is None:
                self.diagnostics.unlabeled_frames += 1

            state = self.detector.update(t, entry.eye.gaze)
            neye_active = state.attention_active
            if not neye_active:
                # attention event over: any open capture window closes with it
                if self._window is not None:
                    self._close_window()
                self.ledger.accrue(dt, neye_active=False, capturing=False)
                continue

            self.diagnostics.attention_frames += 1
            feature = extract_eye_feature(entry.eye, self.models.extractor)
            is_non_neutral, _ = classify_neutral(feature, self.models.trigger)

            if self._window is None and is_non_neutral:
                self._window = _OpenWindow(t_start=t, t_end=t)
                self.diagnostics.windows_opened += 1

            capturing = self._window is not None
            if capturing:
                if is_non_neutral:
                    self._window.neutral_streak = 0
                else:
                    self._window.neutral_streak += 1
                self._capture_frame(entry)
                self.diagnostics.capturing_frames += 1
                if (self._window is not None
                        and self._window.neutral_streak >= off_streak):
                    self._close_window()
            self.ledger.accrue(dt, neye_active=True, capturing=capturing)
        if self._window is not None:
            self._close_window()
        self.detector.finish()


def run(manifest: Manifest, models: PipelineModels, provider: ProviderClient,
        store: EmbeddingStore, cfg: Config
        ) -> Tuple[List[EmotionshipRecord], UsageLedger, Diagnostics, List[Tuple[int, float]]]:
    """Replay a manifest; returns (records, ledger, diagnostics, IS series)."""
    execution = PipelineRun(models, provider, store, cfg)
    execution.run(manifest)
    return execution.records, execution.ledger, execution.diagnostics, execution.is_points
