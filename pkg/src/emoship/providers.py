"""Vision-language provider clients: mock, child-process (exec), and HTTP.

Every client exposes the same three synchronous calls (``regions``, ``vqa``,
``caption``) with at most one outstanding request.  The exec and HTTP clients
speak the byte-exact wire protocol from :mod:`emoship.protocol`; the mock
client answers deterministically from per-frame sidecar annotation files.
"""

from __future__ import annotations

import os
import select
import shlex
import subprocess
import time
import urllib.error
import urllib.request
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import protocol
from .core import Region, SceneFrame
from .errors import DataError, ProtocolError, ProviderUnavailableError


class ProviderClient:
    """Interface shared by all provider transports."""

    def regions(self, frame_id: str) -> List[dict]:
        raise NotImplementedError

    def vqa(self, frame_id: str, question: str, candidate_ids: Sequence[int]) -> str:
        raise NotImplementedError

    def caption(self, frame_id: str, candidate_ids: Sequence[int]) -> str:
        raise NotImplementedError

    def close(self) -> None:
        pass


def _check_candidates(candidate_ids: Sequence[int], r_max: int = 10) -> List[int]:
    ids = [int(i) for i in candidate_ids]
    if not 1 <= len(ids) <= r_max:
        raise DataError(f"need 1..{r_max} candidates, got {len(ids)}")
    return ids


class MockProvider(ProviderClient):
    """Replays sidecar annotation files verbatim; fully deterministic.

    The sidecar for frame F is ``<sidecar_dir>/<F>.json`` holding a regions
    response object plus an optional ``gt_attended`` region index.  VQA
    answers with the tag of the candidate nearest the gt_attended index
    (falling back to the first candidate); caption wraps that tag in a fixed
    sentence template.
    """

    CAPTION_TEMPLATE = "a scene of {tag}"

    def __init__(self, sidecar_dir, d_vis: Optional[int] = None):
        self.sidecar_dir = Path(sidecar_dir)
        self.d_vis = d_vis

    def _load(self, frame_id: str) -> dict:
        path = self.sidecar_dir / f"{frame_id}.json"
        if not path.exists():
            raise ProtocolError(f"no sidecar annotation for frame {frame_id!r}")
        return protocol.decode_sidecar(path.read_bytes(), d_vis=self.d_vis)

    def regions(self, frame_id: str) -> List[dict]:
        return self._load(frame_id)["regions"]

    def _attended(self, frame_id: str, candidate_ids: Sequence[int]) -> dict:
        sidecar = self._load(frame_id)
        regions = sidecar["regions"]
        for i in candidate_ids:
            if not 0 <= i < len(regions):
                raise ProtocolError(f"candidate id {i} out of range for {frame_id!r}")
        gt = sidecar.get("gt_attended")
        if gt is None:
            chosen = candidate_ids[0]
        else:
            chosen = min(candidate_ids, key=lambda i: (abs(i - gt), i))
        return regions[chosen]

    def vqa(self, frame_id, question, candidate_ids) -> str:
        ids = _check_candidates(candidate_ids)
        return self._attended(frame_id, ids)["tag"]

    def caption(self, frame_id, candidate_ids) -> str:
        ids = _check_candidates(candidate_ids)
        return self.CAPTION_TEMPLATE.format(tag=self._attended(frame_id, ids)["tag"])


class _WireClient(ProviderClient):
    """Shared request/response handling for byte-protocol transports."""

    def __init__(self, d_vis: Optional[int] = None, record: bool = False):
        self.d_vis = d_vis
        self.transcript: List[Tuple[bytes, bytes]] = [] if record else None

    def _roundtrip(self, request_line: bytes) -> bytes:
        raise NotImplementedError

    def _call(self, request: dict) -> dict:
        request_line = protocol.encode_request(request)
        response_line = self._roundtrip(request_line)
        if self.transcript is not None:
            self.transcript.append((request_line, response_line))
        decoded = protocol.decode_response(
            response_line, expected_op=request["op"],
            d_vis=self.d_vis if request["op"] == "regions" else None)
        if "error" in decoded:
            raise ProtocolError(f"provider error: {decoded['error']}")
        if decoded["frame_id"] != request["frame_id"]:
            raise ProtocolError("response frame_id does not mirror request")
        return decoded

    def regions(self, frame_id) -> List[dict]:
        return self._call({"op": "regions", "frame_id": frame_id})["regions"]

    def vqa(self, frame_id, question, candidate_ids) -> str:
        ids = _check_candidates(candidate_ids)
        return self._call({"op": "vqa", "frame_id": frame_id,
                           "question": question, "candidate_ids": ids})["answer"]

    def caption(self, frame_id, candidate_ids) -> str:
        ids = _check_candidates(candidate_ids)
        return self._call({"op": "caption", "frame_id": frame_id,
                           "candidate_ids": ids})["tag"]


class ExecProvider(_WireClient):
    """Runs a provider as a child process speaking the protocol over stdio."""

    def __init__(self, command: str, timeout_s: float = 5.0,
                 d_vis: Optional[int] = None, record: bool = False):
        super().__init__(d_vis=d_vis, record=record)
        self.timeout_s = timeout_s
        try:
            self._proc = subprocess.Popen(
                shlex.split(command), stdin=subprocess.PIPE,
                stdout=subprocess.PIPE)
        except OSError as exc:
            raise ProviderUnavailableError(f"cannot start provider: {exc}") from exc
        self._buffer = b""

    def _read_line(self) -> bytes:
        fd = self._proc.stdout.fileno()
        deadline = time.monotonic() + self.timeout_s
        while b"\n" not in self._buffer:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise ProviderUnavailableError(
                    f"provider timed out after {self.timeout_s}s")
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                continue
            chunk = os.read(fd, 65536)
            if not chunk:
                raise ProviderUnavailableError("provider closed its stdout")
            self._buffer += chunk
        line, _, self._buffer = self._buffer.partition(b"\n")
        return line + b"\n"

    def _roundtrip(self, request_line: bytes) -> bytes:
        if self._proc.poll() is not None:
            raise ProviderUnavailableError("provider process has exited")
        try:
            self._proc.stdin.write(request_line)
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ProviderUnavailableError(f"provider pipe broken: {exc}") from exc
        return self._read_line()

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.stdin.close()
            try:
                self._proc.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()


class HttpProvider(_WireClient):
    """POSTs one request line to <base_url>/v1/<op> and reads one response line."""

    def __init__(self, base_url: str, timeout_s: float = 5.0,
                 d_vis: Optional[int] = None, record: bool = False):
        super().__init__(d_vis=d_vis, record=record)
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s

    def _roundtrip(self, request_line: bytes) -> bytes:
        op = protocol.decode_request(request_line)["op"]
        req = urllib.request.Request(
            f"{self.base_url}/v1/{op}", data=request_line,
            headers={"Content-Type": "application/x-ndjson"}, method="POST")
        try:
            with urllib.request.urlopen(req, timeout=self.timeout_s) as resp:
                body = resp.read()
        except (urllib.error.URLError, TimeoutError, OSError) as exc:
            raise ProviderUnavailableError(f"http provider unreachable: {exc}") from exc
        return body if body.endswith(b"\n") else body + b"\n"


class TranscriptProvider(ProviderClient):
    """Replays a recorded transcript: alternating request/response lines.

    Each call must byte-match the next recorded request; the recorded
    response is returned.  Used for golden-fixture tests and offline replay.
    """

    def __init__(self, path, d_vis: Optional[int] = None):
        lines = Path(path).read_bytes().splitlines(keepends=True)
        if len(lines) % 2 != 0:
            raise ProtocolError("transcript must hold request/response pairs")
        self._pairs = [(lines[i], lines[i + 1]) for i in range(0, len(lines), 2)]
        self._cursor = 0
        self.d_vis = d_vis

    def _call(self, request: dict) -> dict:
        request_line = protocol.encode_request(request)
        if self._cursor >= len(self._pairs):
            raise ProtocolError("transcript exhausted")
        recorded_request, recorded_response = self._pairs[self._cursor]
        if recorded_request != request_line:
            raise ProtocolError(
                f"request does not match transcript entry {self._cursor}")
        self._cursor += 1
        decoded = protocol.decode_response(
            recorded_response, expected_op=request["op"],
            d_vis=self.d_vis if request["op"] == "regions" else None)
        if "error" in decoded:
            raise ProtocolError(f"provider error: {decoded['error']}")
        return decoded

    def regions(self, frame_id) -> List[dict]:
        return self._call({"op": "regions", "frame_id": frame_id})["regions"]

    def vqa(self, frame_id, question, candidate_ids) -> str:
        ids = _check_candidates(candidate_ids)
        return self._call({"op": "vqa", "frame_id": frame_id,
                           "question": question, "candidate_ids": ids})["answer"]

    def caption(self, frame_id, candidate_ids) -> str:
        ids = _check_candidates(candidate_ids)
        return self._call({"op": "caption", "frame_id": frame_id,
                           "candidate_ids": ids})["tag"]


def fetch_regions(frame: SceneFrame, provider: ProviderClient,
                  d_vis: int) -> List[Region]:
    """Fetch and validate the K candidate regions for a scene frame."""
    out = []
    for i, obj in enumerate(provider.regions(frame.frame_id)):
        if len(obj["feature"]) != d_vis:
            raise ProtocolError(
                f"region {i}: feature length {len(obj['feature'])} != D_vis {d_vis}")
        out.append(Region(rect=tuple(obj["rect"]), feature=tuple(obj["feature"]),
                          tag=obj["tag"]))
    return out


def make_provider(spec: str, sidecar_dir=None, timeout_s: float = 5.0,
                  d_vis: Optional[int] = None, record: bool = False) -> ProviderClient:
    """Build a provider from a CLI spec: mock | exec:CMD | http:URL | transcript:PATH."""
    if spec == "mock":
        if sidecar_dir is None:
            raise DataError("mock provider requires a sidecar directory")
        return MockProvider(sidecar_dir, d_vis=d_vis)
    if spec.startswith("exec:"):
        return ExecProvider(spec[len("exec:"):], timeout_s=timeout_s,
                            d_vis=d_vis, record=record)
    if spec.startswith("http:"):
        url = spec[len("http:"):]
        if not url.startswith(("http://", "https://")):
            url = "http://" + url.lstrip("/")
        return HttpProvider(url, timeout_s=timeout_s, d_vis=d_vis, record=record)
    if spec.startswith("transcript:"):
        return TranscriptProvider(spec[len("transcript:"):], d_vis=d_vis)
    raise DataError(f"unknown provider spec {spec!r}")
