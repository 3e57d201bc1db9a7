"""Transports for the provider backend: stdio loop and HTTP endpoint.

Both transports frame messages identically (one JSON object per line) and
handle one request at a time, matching the client's at-most-one-outstanding
contract.
"""

from __future__ import annotations

import sys
from http.server import BaseHTTPRequestHandler, HTTPServer

from .backend import Backend


def serve_stdio(backend: Backend, stdin=None, stdout=None) -> None:
    """Answer newline-framed requests on stdin until EOF."""
    stdin = stdin if stdin is not None else sys.stdin.buffer
    stdout = stdout if stdout is not None else sys.stdout.buffer
    for line in stdin:
        stdout.write(backend.handle_line(line))
        stdout.flush()


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def do_POST(self):  # noqa: N802 (http.server naming)
        if not self.path.startswith("/v1/"):
            self.send_error(404, "unknown endpoint")
            return
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length)
        if not body.endswith(b"\n"):
            body += b"\n"
        response = self.server.backend.handle_line(body)
        self.send_response(200)
        self.send_header("Content-Type", "application/x-ndjson")
        self.send_header("Content-Length", str(len(response)))
        self.end_headers()
        self.wfile.write(response)

    def log_message(self, fmt, *args):
        pass  # keep stdout/stderr quiet for deterministic harnesses


def serve_http(backend: Backend, host: str = "127.0.0.1",
               port: int = 0) -> None:
    """Serve until interrupted; prints the bound address once ready."""
    server = HTTPServer((host, port), _Handler)
    server.backend = backend
    print(f"listening on http://{server.server_address[0]}:"
          f"{server.server_address[1]}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
