"""Loopback HTTP wrapper around any policy: POST /infer and GET /health."""
from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .protocol import ProtocolError, request_from_dict, response_to_dict


class PolicyServer:
    """Serves one policy on a background thread. Usable as a context manager."""

    def __init__(self, policy, host: str = "127.0.0.1", port: int = 0):
        self.policy = policy
        self._httpd = ThreadingHTTPServer((host, port), _handler_for(policy))
        self._thread = threading.Thread(target=self._httpd.serve_forever,
                                        name="policy-server", daemon=True)

    @property
    def address(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "PolicyServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()

    def __enter__(self) -> "PolicyServer":
        return self.start()

    def __exit__(self, *exc_info) -> None:
        self.stop()


def _handler_for(policy) -> type[BaseHTTPRequestHandler]:
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, *args) -> None:  # keep test output quiet
            pass

        def _send(self, status: int, doc: dict) -> None:
            body = json.dumps(doc).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self) -> None:
            if self.path != "/health":
                self._send(404, {"error": f"unknown path {self.path!r}"})
                return
            name = getattr(policy, "name", policy.__class__.__name__)
            self._send(200, {"status": "ok", "policy": name})

        def do_POST(self) -> None:
            if self.path != "/infer":
                self._send(404, {"error": f"unknown path {self.path!r}"})
                return
            try:
                length = int(self.headers.get("Content-Length", "0"))
                raw = self.rfile.read(length)
                doc = json.loads(raw.decode("utf-8"))
            except (ValueError, UnicodeDecodeError) as exc:
                self._send(400, {"error": f"malformed JSON body: {exc}",
                                 "field": "body"})
                return
            try:
                request = request_from_dict(doc)
            except ProtocolError as exc:
                self._send(400, {"error": str(exc), "field": exc.field})
                return
            try:
                response = policy.answer(request)
            except Exception as exc:  # surface policy crashes as 500s
                self._send(500, {"error": f"{type(exc).__name__}: {exc}"})
                return
            self._send(200, response_to_dict(response))

    return Handler
