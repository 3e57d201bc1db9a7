"""Wire protocol for the vision-language provider boundary.

Transport-independent framing: one UTF-8 JSON object per line, newline
terminated, at most one outstanding request per stream.  Encoding is
canonical so replays are byte-stable: fixed key order (as listed below),
compact separators, ASCII escapes, floats as shortest round-trip decimals.

Requests
    regions  {"op":"regions","frame_id":F}
    vqa      {"op":"vqa","frame_id":F,"question":Q,"candidate_ids":[i,...]}
    caption  {"op":"caption","frame_id":F,"candidate_ids":[i,...]}

Responses (op and frame_id mirror the request)
    regions  {"op":"regions","frame_id":F,"regions":[R,...]}
    vqa      {"op":"vqa","frame_id":F,"answer":A}
    caption  {"op":"caption","frame_id":F,"tag":T}
    error    {"op":O,"frame_id":F,"error":MSG}

Region object R: {"rect":[cx,cy,w,h],"feature":[f,...],"tag":T} in normalized
scene coordinates; an optional top-level "gt_attended":i index is allowed in
sidecar files (same schema as the regions response).
"""

from __future__ import annotations

import json
from typing import Dict, List, Optional

from .errors import ProtocolError

OPS = ("regions", "vqa", "caption")


def _dumps(obj) -> bytes:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=True).encode("ascii")


def _require(cond: bool, message: str, offset: Optional[int] = None) -> None:
    if not cond:
        raise ProtocolError(message, offset=offset)


def _loads_line(line: bytes) -> dict:
    _require(line.endswith(b"\n"), "message not newline-terminated",
             offset=len(line))
    try:
        obj = json.loads(line[:-1].decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ProtocolError(f"invalid UTF-8: {exc}", offset=exc.start) from exc
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"invalid JSON: {exc.msg}", offset=exc.pos) from exc
    _require(isinstance(obj, dict), "message must be a JSON object", offset=0)
    return obj


# -- requests ---------------------------------------------------------------

def encode_request(req: Dict) -> bytes:
    op = req.get("op")
    _require(op in OPS, f"unknown op {op!r}")
    out = {"op": op, "frame_id": req["frame_id"]}
    if op == "vqa":
        out["question"] = req["question"]
    if op in ("vqa", "caption"):
        out["candidate_ids"] = [int(i) for i in req["candidate_ids"]]
    return _dumps(out) + b"\n"


def decode_request(line: bytes) -> Dict:
    obj = _loads_line(line)
    op = obj.get("op")
    _require(op in OPS, f"unknown op {op!r}", offset=0)
    _require(isinstance(obj.get("frame_id"), str), "frame_id must be a string", offset=0)
    out = {"op": op, "frame_id": obj["frame_id"]}
    if op == "vqa":
        _require(isinstance(obj.get("question"), str), "vqa needs a question string",
                 offset=0)
        out["question"] = obj["question"]
    if op in ("vqa", "caption"):
        ids = obj.get("candidate_ids")
        _require(isinstance(ids, list) and all(isinstance(i, int) for i in ids),
                 "candidate_ids must be a list of integers", offset=0)
        out["candidate_ids"] = list(ids)
    return out


# -- responses --------------------------------------------------------------

def _validate_region_obj(region, index: int) -> dict:
    _require(isinstance(region, dict), f"region {index} is not an object", offset=0)
    rect = region.get("rect")
    _require(isinstance(rect, list) and len(rect) == 4
             and all(isinstance(v, (int, float)) for v in rect),
             f"region {index}: rect must be 4 numbers", offset=0)
    feature = region.get("feature")
    _require(isinstance(feature, list)
             and all(isinstance(v, (int, float)) for v in feature),
             f"region {index}: feature must be a number list", offset=0)
    _require(isinstance(region.get("tag"), str),
             f"region {index}: tag must be a string", offset=0)
    return {"rect": [float(v) for v in rect],
            "feature": [float(v) for v in feature],
            "tag": region["tag"]}


def encode_response(resp: Dict) -> bytes:
    op = resp.get("op")
    _require(op in OPS, f"unknown op {op!r}")
    out = {"op": op, "frame_id": resp["frame_id"]}
    if "error" in resp:
        out["error"] = str(resp["error"])
        return _dumps(out) + b"\n"
    if op == "regions":
        out["regions"] = [
            {"rect": [float(v) for v in r["rect"]],
             "feature": [float(v) for v in r["feature"]],
             "tag": r["tag"]}
            for r in resp["regions"]
        ]
    elif op == "vqa":
        out["answer"] = resp["answer"]
    else:
        out["tag"] = resp["tag"]
    return _dumps(out) + b"\n"


def decode_response(line: bytes, expected_op: Optional[str] = None,
                    d_vis: Optional[int] = None) -> Dict:
    obj = _loads_line(line)
    op = obj.get("op")
    _require(op in OPS, f"unknown op {op!r}", offset=0)
    _require(isinstance(obj.get("frame_id"), str), "frame_id must be a string", offset=0)
    if expected_op is not None:
        _require(op == expected_op,
                 f"response op {op!r} does not mirror request op {expected_op!r}",
                 offset=0)
    out = {"op": op, "frame_id": obj["frame_id"]}
    if "error" in obj:
        _require(isinstance(obj["error"], str), "error must be a string", offset=0)
        out["error"] = obj["error"]
        return out
    if op == "regions":
        regions = obj.get("regions")
        _require(isinstance(regions, list), "regions must be a list", offset=0)
        decoded: List[dict] = []
        for i, region in enumerate(regions):
            validated = _validate_region_obj(region, i)
            if d_vis is not None:
                _require(len(validated["feature"]) == d_vis,
                         f"region {i}: feature length {len(validated['feature'])}"
                         f" != D_vis {d_vis}", offset=0)
            decoded.append(validated)
        out["regions"] = decoded
    elif op == "vqa":
        _require(isinstance(obj.get("answer"), str) and obj["answer"] != "",
                 "vqa answer must be a non-empty string", offset=0)
        out["answer"] = obj["answer"]
    else:
        _require(isinstance(obj.get("tag"), str) and obj["tag"] != "",
                 "caption tag must be a non-empty string", offset=0)
        out["tag"] = obj["tag"]
    return out


def decode_sidecar(data: bytes, d_vis: Optional[int] = None) -> Dict:
    """Parse a sidecar annotation file: a regions response plus optional gt_attended."""
    line = data if data.endswith(b"\n") else data + b"\n"
    obj = _loads_line(line)
    decoded = decode_response(line, expected_op="regions", d_vis=d_vis)
    if "gt_attended" in obj:
        _require(isinstance(obj["gt_attended"], int),
                 "gt_attended must be an integer index", offset=0)
        decoded["gt_attended"] = obj["gt_attended"]
    return decoded
