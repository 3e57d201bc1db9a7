"""Deterministic provider backend: annotation lookup plus image heuristics.

The "model directory" holds the assets the service answers from:

    model.txt            key = value text; must define d_vis (feature length)
                         and may define max_regions (default 5)
    frames/<id>.json     optional precomputed annotations per frame, in the
                         sidecar schema (a regions response object); feature
                         vectors of any length are padded/truncated to d_vis

For a frame id with no precomputed annotation, the backend falls back to the
image ``<id>.*`` under the image root and derives a stable set of regions
from a hash of the image bytes.  A frame id with neither an annotation nor
an image yields a structured protocol error response.

All answers are pure functions of the assets, so repeating a request always
returns identical bytes.
"""

from __future__ import annotations

import hashlib
import random
from collections import Counter
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from emoship import protocol
from emoship.errors import InputError, ProtocolError

CAPTION_TEMPLATE = "a scene of {tag}"

# Fixed tag vocabulary for the image-hash fallback detector.
FALLBACK_TAGS = (
    "person", "face", "dog", "cat", "tree", "car", "screen", "book",
    "window", "table", "cup", "bird", "flower", "building", "sky", "food",
)


def _parse_model_file(path: Path) -> Dict[str, int]:
    if not path.exists():
        raise InputError(f"model file not found: {path}")
    values: Dict[str, int] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InputError(f"{path}:{lineno}: expected 'key = value'")
        try:
            values[key.strip()] = int(value.strip())
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from exc
    if "d_vis" not in values:
        raise InputError(f"{path}: missing required key d_vis")
    if values["d_vis"] <= 0:
        raise InputError(f"{path}: d_vis must be positive")
    values.setdefault("max_regions", 5)
    return values


def _fit_feature(feature: Sequence[float], d_vis: int) -> List[float]:
    """Pad with zeros or truncate so the served feature has length d_vis."""
    out = [float(v) for v in feature[:d_vis]]
    out.extend(0.0 for _ in range(d_vis - len(out)))
    return out


class Backend:
    """Answers regions/vqa/caption requests for one model directory."""

    def __init__(self, model_dir: Path, image_root: Optional[Path] = None):
        self.model_dir = Path(model_dir)
        self.image_root = Path(image_root) if image_root else None
        model = _parse_model_file(self.model_dir / "model.txt")
        self.d_vis = model["d_vis"]
        self.max_regions = model["max_regions"]
        self._cache: Dict[str, List[dict]] = {}

    # -- region sources -----------------------------------------------------

    def _from_annotation(self, frame_id: str) -> Optional[List[dict]]:
        path = self.model_dir / "frames" / f"{frame_id}.json"
        if not path.exists():
            return None
        decoded = protocol.decode_sidecar(path.read_bytes())
        return decoded["regions"]

    def _find_image(self, frame_id: str) -> Optional[Path]:
        if self.image_root is None or not self.image_root.is_dir():
            return None
        matches = sorted(self.image_root.glob(f"{frame_id}.*"))
        return matches[0] if matches else None

    def _from_image(self, frame_id: str) -> Optional[List[dict]]:
        image = self._find_image(frame_id)
        if image is None:
            return None
        digest = hashlib.sha256(image.read_bytes()).digest()
        rng = random.Random(digest)
        count = 1 + rng.randrange(self.max_regions)
        regions = []
        for i in range(count):
            w = rng.uniform(0.05, 0.4)
            h = rng.uniform(0.05, 0.4)
            cx = rng.uniform(w / 2, 1.0 - w / 2)
            cy = rng.uniform(h / 2, 1.0 - h / 2)
            feature = [rng.uniform(-1.0, 1.0) for _ in range(self.d_vis)]
            tag = FALLBACK_TAGS[rng.randrange(len(FALLBACK_TAGS))]
            regions.append({"rect": [cx, cy, w, h], "feature": feature,
                            "tag": tag})
        return regions

    def regions(self, frame_id: str) -> List[dict]:
        if frame_id in self._cache:
            return self._cache[frame_id]
        raw = self._from_annotation(frame_id)
        if raw is None:
            raw = self._from_image(frame_id)
        if raw is None:
            raise ProtocolError(f"unknown frame id {frame_id!r}")
        served = [{"rect": [float(v) for v in r["rect"]],
                   "feature": _fit_feature(r["feature"], self.d_vis),
                   "tag": r["tag"].lower()} for r in raw]
        self._cache[frame_id] = served
        return served

    # -- question answering and captioning ----------------------------------

    def _candidates(self, frame_id: str,
                    candidate_ids: Sequence[int]) -> List[dict]:
        regions = self.regions(frame_id)
        if not candidate_ids:
            raise ProtocolError("candidate_ids must be non-empty")
        chosen = []
        for i in candidate_ids:
            if not 0 <= i < len(regions):
                raise ProtocolError(
                    f"candidate id {i} out of range for {frame_id!r}")
            chosen.append(regions[i])
        return chosen

    def vqa(self, frame_id: str, question: str,
            candidate_ids: Sequence[int]) -> str:
        candidates = self._candidates(frame_id, candidate_ids)
        tokens = set(question.lower().split())
        for region in candidates:
            if region["tag"] in tokens:
                return region["tag"]
        return candidates[0]["tag"]

    def caption(self, frame_id: str, candidate_ids: Sequence[int]) -> str:
        candidates = self._candidates(frame_id, candidate_ids)
        tags = [r["tag"] for r in candidates]
        counts = Counter(tags)
        top = max(counts.values())
        # modal tag; ties broken by first appearance among the candidates
        tag = min((t for t, c in counts.items() if c == top),
                  key=tags.index)
        return CAPTION_TEMPLATE.format(tag=tag)

    # -- wire handling ------------------------------------------------------

    def handle_line(self, line: bytes) -> bytes:
        """One request line in, one canonical response line out."""
        try:
            request = protocol.decode_request(line)
        except ProtocolError as exc:
            return protocol.encode_response(
                {"op": "regions", "frame_id": "", "error": f"bad request: {exc}"})
        op, frame_id = request["op"], request["frame_id"]
        try:
            if op == "regions":
                body = {"regions": self.regions(frame_id)}
            elif op == "vqa":
                body = {"answer": self.vqa(frame_id, request["question"],
                                           request["candidate_ids"])}
            else:
                body = {"tag": self.caption(frame_id,
                                            request["candidate_ids"])}
        except ProtocolError as exc:
            return protocol.encode_response(
                {"op": op, "frame_id": frame_id, "error": str(exc)})
        return protocol.encode_response(
            {"op": op, "frame_id": frame_id, **body})


def load_backend(model_dir, image_root=None) -> Backend:
    return Backend(Path(model_dir),
                   Path(image_root) if image_root else None)
