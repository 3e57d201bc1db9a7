"""Deterministic gaze-driven emotion analysis pipeline.

The package turns an eye-tracking stream plus scene-frame annotations into
"emotionship" records: (emotion, attended region, summary tag, influential
score).  Everything is replayable: given the same manifest, model archives,
seed, and provider transcripts, every output byte is identical.
"""

from .archive import TensorArchive, load_tensor_archive
from .config import Config, DEFAULTS, load_config
from .core import (EmotionLabel, EmotionshipRecord, EyeSample, Region,
                   SceneFrame, NON_NEUTRAL_EMOTIONS, POSITIVE_EMOTIONS,
                   NEGATIVE_EMOTIONS)
from .energy import (PowerProfile, UsageLedger, average_power_w,
                     battery_life_h, energy_wh, record_everything_life_h)
from .errors import (DataError, DivergenceError, EmoshipError, InputError,
                     InsufficientDataError, IntegrityError, ModelError,
                     ProtocolError, ProviderUnavailableError)
from .eyefeat import (ArchiveLinearExtractor, EyeFeature, MockExtractor,
                      PassthroughExtractor, TriggerModel, classify_neutral,
                      extract_eye_feature)
from .fusion import (FusionHead, FusionOutput, fuse_classify,
                     influential_score, loss_and_gradients, train_head)
from .gaze import (AttentionDetector, AttentionEvent, Movement,
                   classify_movement, detect_attention_events)
from .metrics import (ConfusionMatrix, PilotRow, PilotSummary, load_pilot_csv,
                      macro_metrics, majority_vote, multiclass_accuracy,
                      pilot_derive, pilot_summary, profile_type)
from .pipeline import Diagnostics, PipelineModels, run
from .providers import (ExecProvider, HttpProvider, MockProvider,
                        ProviderClient, TranscriptProvider, fetch_regions,
                        make_provider)
from .roiselect import (CandidateSet, select_attended, select_candidates,
                        summarize)

__version__ = "0.1.0"

__all__ = [
    "TensorArchive", "load_tensor_archive",
    "Config", "DEFAULTS", "load_config",
    "EmotionLabel", "EmotionshipRecord", "EyeSample", "Region", "SceneFrame",
    "NON_NEUTRAL_EMOTIONS", "POSITIVE_EMOTIONS", "NEGATIVE_EMOTIONS",
    "PowerProfile", "UsageLedger", "average_power_w", "battery_life_h",
    "energy_wh", "record_everything_life_h",
    "DataError", "DivergenceError", "EmoshipError", "InputError",
    "InsufficientDataError", "IntegrityError", "ModelError", "ProtocolError",
    "ProviderUnavailableError",
    "ArchiveLinearExtractor", "EyeFeature", "MockExtractor",
    "PassthroughExtractor", "TriggerModel", "classify_neutral",
    "extract_eye_feature",
    "FusionHead", "FusionOutput", "fuse_classify", "influential_score",
    "loss_and_gradients", "train_head",
    "AttentionDetector", "AttentionEvent", "Movement", "classify_movement",
    "detect_attention_events",
    "ConfusionMatrix", "PilotRow", "PilotSummary", "load_pilot_csv",
    "macro_metrics", "majority_vote", "multiclass_accuracy", "pilot_derive",
    "pilot_summary", "profile_type",
    "Diagnostics", "PipelineModels", "run",
    "ExecProvider", "HttpProvider", "MockProvider", "ProviderClient",
    "TranscriptProvider", "fetch_regions", "make_provider",
    "CandidateSet", "select_attended", "select_candidates", "summarize",
]
