"""Gaze-driven region selection: top-10 nearest candidates, then the single
attended region via the provider's VQA answer and embedding similarity, plus
the caption summary tag."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .core import Region
from .embedding import EmbeddingStore, similarity
from .errors import DataError
from .providers import ProviderClient


@dataclass(frozen=True)
class CandidateSet:
    """min(K, max) gaze-nearest regions, in non-decreasing distance order.

    ``indices`` are the original region list positions; they carry the
    documented tie rule and let providers address candidates on the wire.
    """

    frame_id: str
    regions: Tuple[Region, ...]
    distances: Tuple[float, ...]
    indices: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if any(b < a for a, b in zip(self.distances, self.distances[1:])):
            raise DataError("candidate distances must be non-decreasing")
        if len(self.regions) != len(self.distances):
            raise DataError("regions/distances length mismatch")

    def __len__(self) -> int:
        return len(self.regions)


def select_candidates(regions: Sequence[Region], gaze: Tuple[float, float],
                      frame_id: str = "", max_candidates: int = 10) -> CandidateSet:
    """Pick the regions whose centers are closest to the gaze point.

    Ties break on the original region index (stable).  An empty input yields
    an empty set; the pipeline skips such frames and counts them in
    diagnostics.
    """
    gx, gy = gaze
    if not (0.0 <= gx <= 1.0 and 0.0 <= gy <= 1.0):
        raise DataError(f"gaze {gaze} outside [0,1]^2")
    ranked = sorted(
        ((math.hypot(r.center[0] - gx, r.center[1] - gy), i, r)
         for i, r in enumerate(regions)),
        key=lambda item: (item[0], item[1]))
    picked = ranked[:max_candidates]
    return CandidateSet(
        frame_id=frame_id,
        regions=tuple(r for _, _, r in picked),
        distances=tuple(d for d, _, _ in picked),
        indices=tuple(i for _, i, _ in picked))


def select_attended(cands: CandidateSet, provider: ProviderClient,
                    store: EmbeddingStore,
                    question: str) -> Tuple[Region, str, int]:
    """Ask the provider which object drives the emotion, then match the answer
    against candidate tags by embedding similarity.

    Returns (attended region, raw answer, candidate position).  Ties go to the
    smaller candidate position.
    """
    if len(cands) == 0:
        raise DataError("cannot select attended region from empty candidate set")
    answer = provider.vqa(cands.frame_id, question, cands.indices)
    best_pos = 0
    best_sim = -math.inf
    for pos, region in enumerate(cands.regions):
        sim = similarity(answer, region.tag, store)
        if sim > best_sim:
            best_sim = sim
            best_pos = pos
    return cands.regions[best_pos], answer, best_pos


def summarize(cands: CandidateSet, provider: ProviderClient) -> str:
    """Caption the candidate set; returns the provider tag verbatim."""
    if len(cands) == 0:
        raise DataError("cannot summarize an empty candidate set")
    return provider.caption(cands.frame_id, cands.indices)
