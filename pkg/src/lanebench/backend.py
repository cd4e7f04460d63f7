"""Annotation backend: HTTP service over a DatasetStore for the review UI.

Reads are concurrent; writes are serialized behind one lock. Every mutation
bumps a version counter so clients can detect stale reads.
"""
from __future__ import annotations

import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .store import (DatasetStore, StatusTransitionError, StoreError,
                    StoreValidationError, FrameNotFoundError, UnknownQidError)

_SAFE_NAME = re.compile(r"^[A-Za-z0-9_\-]+$")
_SAFE_FILE = re.compile(r"^[A-Za-z0-9_\-.]+$")


class AnnotationService:
    """Store operations plus the version counter, shared by all requests."""

    def __init__(self, root: str | Path):
        self.store = DatasetStore(root)
        self.version = 0
        self.lock = threading.Lock()

    def bump(self) -> int:
        self.version += 1
        return self.version


class AnnotationBackend:
    def __init__(self, root: str | Path, host: str = "127.0.0.1", port: int = 0):
        self.service = AnnotationService(root)
        self._httpd = ThreadingHTTPServer((host, port),
                                          _handler_for(self.service))
        self._thread = threading.Thread(target=self._httpd.serve_forever,
                                        name="annotation-backend", daemon=True)

    @property
    def address(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "AnnotationBackend":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()

    def serve_forever(self) -> None:
        self._httpd.serve_forever()

    def __enter__(self) -> "AnnotationBackend":
        return self.start()

    def __exit__(self, *exc_info) -> None:
        self.stop()


def _handler_for(service: AnnotationService) -> type[BaseHTTPRequestHandler]:
    store = service.store

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, *args) -> None:
            pass

        # -- plumbing -----------------------------------------------------

        def _cors(self) -> None:
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods",
                             "GET, POST, PUT, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")

        def _json(self, status: int, doc) -> None:
            body = json.dumps(doc).encode("utf-8")
            self.send_response(status)
            self._cors()
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _bytes(self, status: int, data: bytes, content_type: str) -> None:
            self.send_response(status)
            self._cors()
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def _body(self) -> dict:
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length)
            doc = json.loads(raw.decode("utf-8"))
            if not isinstance(doc, dict):
                raise ValueError("request body must be a JSON object")
            return doc

        def do_OPTIONS(self) -> None:
            self.send_response(204)
            self._cors()
            self.send_header("Content-Length", "0")
            self.end_headers()

        # -- reads ----------------------------------------------------------

        def do_GET(self) -> None:
            url = urlparse(self.path)
            parts = [p for p in url.path.split("/") if p]
            query = parse_qs(url.query)
            try:
                if parts == ["api", "version"]:
                    self._json(200, {"version": service.version})
                elif parts == ["api", "overview"]:
                    self._json(200, {"scenarios": store.overview(),
                                     "version": service.version})
                elif len(parts) == 3 and parts[:2] == ["api", "scenario"]:
                    self._get_scenario(parts[2])
                elif len(parts) == 4 and parts[:2] == ["api", "frame"]:
                    self._get_frame(parts[2], parts[3])
                elif len(parts) == 3 and parts[:2] == ["api", "qas"]:
                    self._get_qas(parts[2], query)
                elif len(parts) == 3 and parts[:2] == ["api", "history"]:
                    self._get_history(parts[2], query)
                elif parts == ["api", "options"]:
                    self._json(200, {"options": {str(k): v for k, v
                                                 in store.all_options().items()}})
                elif len(parts) == 3 and parts[:2] == ["api", "options"]:
                    self._json(200, {"options": store.options(int(parts[2]))})
                elif len(parts) == 3 and parts[0] == "images":
                    self._get_image(parts[1], parts[2])
                else:
                    self._json(404, {"error": f"unknown path {url.path!r}"})
            except FrameNotFoundError as exc:
                self._json(404, {"error": str(exc)})
            except (StoreError, ValueError) as exc:
                self._json(400, {"error": str(exc)})

        def _get_scenario(self, name: str) -> None:
            if not _SAFE_NAME.match(name):
                self._json(400, {"error": f"bad scenario name {name!r}"})
                return
            frames = store.frame_indices(name)
            if not frames:
                self._json(404, {"error": f"unknown scenario {name!r}"})
                return
            entry, exit_ = store.interval(name)
            self._json(200, {"name": name, "frames": frames,
                             "entry_frame": entry, "exit_frame": exit_,
                             "version": service.version})

        def _get_frame(self, scenario: str, frame: str) -> None:
            if not _SAFE_NAME.match(scenario):
                self._json(400, {"error": f"bad scenario name {scenario!r}"})
                return
            record = store.read_frame(scenario, int(frame))
            doc = record.to_dict()
            doc.pop("world", None)  # snapshots are bulky; served on demand
            self._json(200, {
                "record": doc,
                "excluded": not store.in_interval(scenario, record.frame_index),
                "version": service.version,
            })

        def _get_qas(self, scenario: str, query: dict) -> None:
            qids = None
            raw = query.get("qids", [""])[0]
            if raw.strip():
                try:
                    qids = {int(tok) for tok in raw.split(",") if tok.strip()}
                except ValueError:
                    self._json(400, {"error": f"non-numeric qid filter {raw!r}"})
                    return
            keyword = query.get("keyword", [None])[0]
            lo = query.get("lo", [None])[0]
            hi = query.get("hi", [None])[0]
            frame_range = (int(lo) if lo else None, int(hi) if hi else None)
            matches = store.filter_qas(scenario, frame_range=frame_range,
                                       qids=qids, keyword=keyword)
            self._json(200, {"matches": [
                {"frame_index": idx, **pair.to_dict()} for idx, pair in matches
            ], "version": service.version})

        def _get_history(self, scenario: str, query: dict) -> None:
            frame = query.get("frame_index", [None])[0]
            qid = query.get("qid", [None])[0]
            edits = store.history(scenario,
                                  frame_index=int(frame) if frame else None,
                                  qid=int(qid) if qid else None)
            self._json(200, {"edits": [e.to_dict() for e in edits]})

        def _get_image(self, scenario: str, filename: str) -> None:
            if not _SAFE_NAME.match(scenario) or not _SAFE_FILE.match(filename) \
                    or ".." in filename:
                self._json(400, {"error": "bad image path"})
                return
            path = store.scenario_dir(scenario) / filename
            if not path.is_file():
                self._json(404, {"error": f"no image {scenario}/{filename}"})
                return
            self._bytes(200, path.read_bytes(), "image/png")

        # -- writes --------------------------------------------------------

        def do_POST(self) -> None:
            self._mutate("POST")

        def do_PUT(self) -> None:
            self._mutate("PUT")

        def _mutate(self, method: str) -> None:
            url = urlparse(self.path)
            parts = [p for p in url.path.split("/") if p]
            try:
                doc = self._body()
            except (ValueError, UnicodeDecodeError) as exc:
                self._json(400, {"error": f"malformed JSON body: {exc}"})
                return
            try:
                with service.lock:
                    if method == "POST" and parts == ["api", "edit"]:
                        self._post_edit(doc)
                    elif method == "POST" and parts == ["api", "mark"]:
                        self._post_mark(doc)
                    elif method == "POST" and parts == ["api", "options"]:
                        self._post_option(doc)
                    elif method == "PUT" and parts == ["api", "interval"]:
                        self._put_interval(doc)
                    else:
                        self._json(404, {"error": f"unknown path {url.path!r}"})
            except FrameNotFoundError as exc:
                self._json(404, {"error": str(exc)})
            except (UnknownQidError, StatusTransitionError,
                    StoreValidationError, StoreError, KeyError,
                    TypeError, ValueError) as exc:
                self._json(400, {"error": str(exc)})

        def _post_edit(self, doc: dict) -> None:
            scenario = doc["scenario"]
            frame_index = int(doc["frame_index"])
            qid = int(doc["qid"])
            new_text = doc["new_text"]
            mark = doc.get("mark")
            edit = store.edit_answer(scenario, frame_index, qid, new_text,
                                     mark=mark)
            if doc.get("save_as_option"):
                store.add_option(qid, new_text)
            record = store.read_frame(scenario, frame_index)
            out = record.to_dict()
            out.pop("world", None)
            self._json(200, {"edit": edit.to_dict() if edit else None,
                             "record": out, "version": service.bump()})

        def _post_mark(self, doc: dict) -> None:
            record = store.mark_status(doc["scenario"],
                                       int(doc["frame_index"]), doc["status"])
            out = record.to_dict()
            out.pop("world", None)
            self._json(200, {"record": out, "version": service.bump()})

        def _post_option(self, doc: dict) -> None:
            options = store.add_option(int(doc["qid"]), doc["text"])
            self._json(200, {"options": options, "version": service.bump()})

        def _put_interval(self, doc: dict) -> None:
            scenario = doc["scenario"]
            store.set_interval(scenario, int(doc["entry_frame"]),
                               int(doc["exit_frame"]))
            entry, exit_ = store.interval(scenario)
            self._json(200, {"entry_frame": entry, "exit_frame": exit_,
                             "version": service.bump()})

    return Handler
