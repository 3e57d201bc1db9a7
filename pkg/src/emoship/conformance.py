"""Provider conformance suite.

Any provider implementation -- the bundled mock, a transcript replay, or an
external service reached over stdio/HTTP -- must satisfy the same contract:

  * ``regions`` returns well-formed region objects (rect in the unit square
    with positive extent, feature of length D_vis, non-empty lowercase tag);
  * ``vqa`` and ``caption`` return non-empty strings for any non-empty subset
    of the advertised candidate indices;
  * repeating any request yields an identical result (determinism);
  * an unknown frame id produces a protocol-level error, not a crash.

``run_conformance`` exercises a live client and returns a list of violation
strings (empty means conformant).  ``check_response_line`` validates a single
raw wire response, for byte-level transcript checks.
"""

from __future__ import annotations

from typing import List, Optional, Sequence

from . import protocol
from .core import Region
from .errors import DataError, EmoshipError, ProtocolError
from .providers import ProviderClient


def check_region_object(obj: dict, d_vis: Optional[int] = None) -> List[str]:
    """Violations of the region contract for one decoded region object."""
    problems = []
    try:
        region = Region(rect=tuple(obj["rect"]), feature=tuple(obj["feature"]),
                        tag=obj["tag"])
    except (KeyError, TypeError, EmoshipError) as exc:
        return [f"region rejected: {exc}"]
    if d_vis is not None and len(region.feature) != d_vis:
        problems.append(
            f"feature length {len(region.feature)} != D_vis {d_vis}")
    if region.tag != region.tag.lower():
        problems.append(f"tag {region.tag!r} is not lowercase")
    if not region.tag.strip():
        problems.append("tag is empty")
    return problems


def check_response_line(line: bytes, op: str,
                        d_vis: Optional[int] = None) -> List[str]:
    """Violations for one raw response line of the given operation."""
    try:
        decoded = protocol.decode_response(
            line, expected_op=op, d_vis=d_vis if op == "regions" else None)
    except ProtocolError as exc:
        return [f"{op}: undecodable response: {exc}"]
    if "error" in decoded:
        return []  # structured errors are part of the contract
    problems = []
    if op == "regions":
        for i, obj in enumerate(decoded["regions"]):
            problems += [f"region {i}: {p}"
                         for p in check_region_object(obj, d_vis)]
    elif op == "vqa" and not decoded["answer"].strip():
        problems.append("vqa: empty answer")
    elif op == "caption" and not decoded["tag"].strip():
        problems.append("caption: empty caption")
    return problems


def run_conformance(provider: ProviderClient, frame_ids: Sequence[str],
                    question: str, d_vis: Optional[int] = None,
                    unknown_frame_id: Optional[str] = None) -> List[str]:
    """Exercise a live provider over the given frames; returns violations.

    Every operation is issued twice and the pair compared, so a conformant
    provider is necessarily deterministic over the probed surface.
    """
    problems: List[str] = []
    for frame_id in frame_ids:
        try:
            regions = provider.regions(frame_id)
        except EmoshipError as exc:
            problems.append(f"{frame_id}: regions failed: {exc}")
            continue
        if not regions:
            problems.append(f"{frame_id}: no regions advertised")
            continue
        for i, obj in enumerate(regions):
            problems += [f"{frame_id}: region {i}: {p}"
                         for p in check_region_object(obj, d_vis)]
        if provider.regions(frame_id) != regions:
            problems.append(f"{frame_id}: regions not deterministic")

        ids = list(range(min(len(regions), 10)))
        try:
            answer = provider.vqa(frame_id, question, ids)
            if not isinstance(answer, str) or not answer.strip():
                problems.append(f"{frame_id}: vqa returned empty answer")
            elif provider.vqa(frame_id, question, ids) != answer:
                problems.append(f"{frame_id}: vqa not deterministic")
        except EmoshipError as exc:
            problems.append(f"{frame_id}: vqa failed: {exc}")
        try:
            caption = provider.caption(frame_id, ids)
            if not isinstance(caption, str) or not caption.strip():
                problems.append(f"{frame_id}: caption empty")
            elif provider.caption(frame_id, ids) != caption:
                problems.append(f"{frame_id}: caption not deterministic")
        except EmoshipError as exc:
            problems.append(f"{frame_id}: caption failed: {exc}")

        try:
            provider.vqa(frame_id, question, [])
            problems.append(f"{frame_id}: empty candidate list accepted")
        except (DataError, ProtocolError):
            pass

    if unknown_frame_id is not None:
        try:
            provider.regions(unknown_frame_id)
            problems.append(
                f"unknown frame {unknown_frame_id!r} answered without error")
        except ProtocolError:
            pass  # structured rejection, as required
        except EmoshipError as exc:
            problems.append(f"unknown frame handling crashed: {exc}")
    return problems
