"""Eye feature extraction and the neutral/non-neutral world-camera trigger.

The eye feature is the concatenation [f_e, pupil]: a raw per-frame embedding
(default 128-dim) plus the 2-dim pupil extent, 130 dims total.  The trigger is
a linear 2-way softmax over that vector; at or above the configured threshold
on the non-neutral probability the world camera turns on.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Protocol, Tuple

import numpy as np

from .archive import TensorArchive
from .core import EyeSample
from .errors import DataError, ModelError


@dataclass(frozen=True)
class EyeFeature:
    vector: Tuple[float, ...]
    t: int


class EyeFeatureExtractor(Protocol):
    """Yields the raw (pre-pupil) eye embedding for a sample."""

    def extract(self, sample: EyeSample) -> np.ndarray: ...


class PassthroughExtractor:
    """Reads the precomputed vector stored on the sample itself."""

    def extract(self, sample: EyeSample) -> np.ndarray:
        if sample.feature is None:
            raise DataError(
                f"sample at t={sample.t} has no precomputed eye feature"
            )
        return np.asarray(sample.feature, dtype=np.float64)


class MockExtractor:
    """Deterministic hash-to-vector map over frame references.

    Distinct frame refs give distinct vectors; identical (seed, ref) pairs are
    stable across runs and platforms.
    """

    def __init__(self, dim: int = 128, seed: int = 0):
        self.dim = dim
        self.seed = seed

    def extract(self, sample: EyeSample) -> np.ndarray:
        key = sample.frame_ref if sample.frame_ref is not None else f"t={sample.t}"
        digest = hashlib.sha256(f"{self.seed}:{key}".encode("utf-8")).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        return rng.standard_normal(self.dim)


class ArchiveLinearExtractor:
    """Single linear layer over the sample's stored embedding.

    Tensors: ``eyefeat.W`` (dim_out x dim_in), ``eyefeat.b`` (dim_out).
    """

    def __init__(self, archive: TensorArchive):
        self.W = archive.get("eyefeat.W").astype(np.float64)
        self.b = archive.get("eyefeat.b").astype(np.float64)
        if self.W.ndim != 2 or self.b.shape != (self.W.shape[0],):
            raise ModelError("eyefeat.W/eyefeat.b shapes are inconsistent")

    def extract(self, sample: EyeSample) -> np.ndarray:
        if sample.feature is None:
            raise DataError(f"sample at t={sample.t} has no stored embedding")
        x = np.asarray(sample.feature, dtype=np.float64)
        if x.shape != (self.W.shape[1],):
            raise ModelError(
                f"embedding length {x.shape[0]} != extractor input {self.W.shape[1]}"
            )
        return self.W @ x + self.b


def extract_eye_feature(sample: EyeSample, extractor: EyeFeatureExtractor) -> EyeFeature:
    """Concatenate the extractor output with the pupil vector."""
    raw = np.asarray(extractor.extract(sample), dtype=np.float64)
    vector = tuple(float(v) for v in raw) + (float(sample.pupil[0]), float(sample.pupil[1]))
    return EyeFeature(vector=vector, t=sample.t)


@dataclass(frozen=True)
class TriggerModel:
    """Linear D_eye -> 2 softmax classifier with decision threshold theta."""

    W: np.ndarray  # (2, D_eye)
    b: np.ndarray  # (2,)
    theta: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.theta < 1.0):
            raise ModelError(f"trigger threshold {self.theta} outside (0,1)")
        if self.W.ndim != 2 or self.W.shape[0] != 2 or self.b.shape != (2,):
            raise ModelError(f"trigger weights have shape {self.W.shape}/{self.b.shape}")

    @classmethod
    def from_archive(cls, archive: TensorArchive, theta: float = 0.5) -> "TriggerModel":
        return cls(W=archive.get("trigger.W").astype(np.float64),
                   b=archive.get("trigger.b").astype(np.float64), theta=theta)


def classify_neutral(feature: EyeFeature, model: TriggerModel) -> Tuple[bool, float]:
    """Return (is_non_neutral, p_non_neutral); p >= theta counts as non-neutral."""
    x = np.asarray(feature.vector, dtype=np.float64)
    if x.shape[0] != model.W.shape[1]:
        raise ModelError(
            f"feature length {x.shape[0]} != trigger input {model.W.shape[1]}"
        )
    logits = model.W @ x + model.b
    logits = logits - logits.max()  # stability shift, softmax is invariant
    exp = np.exp(logits)
    p_non_neutral = float(exp[1] / exp.sum())
    return p_non_neutral >= model.theta, p_non_neutral
