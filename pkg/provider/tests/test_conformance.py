"""Runs the engine's provider conformance suite against the live service
over both transports, so every byte crosses the real wire and the primary
package's decoder."""

import re
import shlex
import subprocess
import sys

import pytest

from emoship.conformance import check_response_line, run_conformance
from emoship.providers import ExecProvider, HttpProvider

from pyprovider.backend import Backend

FRAMES = ["f0", "f1", "img0"]


def stdio_command(model_dir, image_root):
    return (f"{shlex.quote(sys.executable)} -m pyprovider serve"
            f" --mode stdio --model-dir {shlex.quote(str(model_dir))}"
            f" --image-root {shlex.quote(str(image_root))}")


class TestStdioTransport:
    def test_passes_conformance_suite(self, model_env):
        model_dir, image_root = model_env
        client = ExecProvider(stdio_command(model_dir, image_root),
                              timeout_s=10.0, d_vis=4)
        try:
            problems = run_conformance(client, FRAMES, question="what is this",
                                       d_vis=4, unknown_frame_id="ghost")
        finally:
            client.close()
        assert problems == []

    def test_request_transcript_replay_schema_validates(self, model_env):
        from emoship import protocol
        model_dir, image_root = model_env
        requests = [
            {"op": "regions", "frame_id": "f0"},
            {"op": "regions", "frame_id": "ghost"},
            {"op": "vqa", "frame_id": "f1", "question": "tree or car",
             "candidate_ids": [0, 1, 2]},
            {"op": "caption", "frame_id": "img0", "candidate_ids": [0]},
        ]
        payload = b"".join(protocol.encode_request(r) for r in requests)
        proc = subprocess.run(shlex.split(stdio_command(model_dir, image_root)),
                              input=payload, capture_output=True, timeout=30)
        assert proc.returncode == 0
        lines = proc.stdout.splitlines(keepends=True)
        assert len(lines) == len(requests)
        for request, line in zip(requests, lines):
            assert check_response_line(line, request["op"], d_vis=4) == []

    def test_stdio_responses_match_backend_bytes(self, model_env):
        from emoship import protocol
        model_dir, image_root = model_env
        backend = Backend(model_dir, image_root)
        request = protocol.encode_request({"op": "regions", "frame_id": "f1"})
        proc = subprocess.run(shlex.split(stdio_command(model_dir, image_root)),
                              input=request, capture_output=True, timeout=30)
        assert proc.stdout == backend.handle_line(request)


@pytest.fixture
def http_server(model_env):
    model_dir, image_root = model_env
    proc = subprocess.Popen(
        [sys.executable, "-m", "pyprovider", "serve", "--mode", "http",
         "--model-dir", str(model_dir), "--image-root", str(image_root),
         "--port", "0"],
        stdout=subprocess.PIPE, text=True)
    try:
        line = proc.stdout.readline()
        match = re.search(r"listening on (http://\S+)", line)
        assert match, f"no ready line, got {line!r}"
        yield match.group(1)
    finally:
        proc.terminate()
        proc.wait(timeout=5)


class TestHttpTransport:
    def test_passes_conformance_suite(self, http_server):
        client = HttpProvider(http_server, timeout_s=10.0, d_vis=4)
        problems = run_conformance(client, FRAMES, question="what is this",
                                   d_vis=4, unknown_frame_id="ghost")
        assert problems == []
