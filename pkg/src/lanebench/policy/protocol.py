"""Wire protocol for policy inference requests and responses.

Both the loopback HTTP transport and in-process calls exchange the same
records, so a policy behaves identically regardless of how it is reached.
"""
from __future__ import annotations

import base64
import binascii
from dataclasses import dataclass

ANSWER_KINDS = ("free-text", "ranked-object-list", "object-condition-list",
                "key-value")
IMAGE_MODES = ("path", "inline")
INLINE_MEDIA_TYPE = "image/png"


class ProtocolError(ValueError):
    """A request or response document failed field-level validation."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class ImagePayload:
    """One camera frame, referenced by path or carried inline as base64 PNG."""
    mode: str
    path: str | None = None
    data: str | None = None
    media_type: str | None = None


@dataclass(frozen=True)
class PolicyRequest:
    episode_id: str
    frame_index: int
    qid: int
    prompt: str
    images: tuple[ImagePayload, ...] = ()
    answer_kind: str = "free-text"


@dataclass(frozen=True)
class PolicyResponse:
    answer: str
    latency_ms: float = 0.0
    model_id: str = ""


def encode_image_inline(raw: bytes) -> ImagePayload:
    data = base64.b64encode(raw).decode("ascii")
    return ImagePayload(mode="inline", data=data, media_type=INLINE_MEDIA_TYPE)


def decode_image(payload: ImagePayload) -> bytes:
    """Raw bytes of the referenced image; reads the file in path mode."""
    if payload.mode == "inline":
        if payload.data is None:
            raise ProtocolError("images.data", "inline image carries no data")
        try:
            return base64.b64decode(payload.data, validate=True)
        except (binascii.Error, ValueError) as exc:
            raise ProtocolError("images.data", f"invalid base64: {exc}") from exc
    if payload.path is None:
        raise ProtocolError("images.path", "path image carries no path")
    with open(payload.path, "rb") as fh:
        return fh.read()


def _require(doc: dict, key: str, kind: type, prefix: str = ""):
    name = f"{prefix}{key}"
    if key not in doc:
        raise ProtocolError(name, "missing required field")
    value = doc[key]
    if kind is int and isinstance(value, bool):
        raise ProtocolError(name, "expected an integer, got a boolean")
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind):
        raise ProtocolError(name, f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def image_from_dict(doc: dict, prefix: str = "images.") -> ImagePayload:
    if not isinstance(doc, dict):
        raise ProtocolError(prefix.rstrip("."), "each image must be an object")
    mode = _require(doc, "mode", str, prefix)
    if mode not in IMAGE_MODES:
        raise ProtocolError(f"{prefix}mode",
                            f"unknown mode {mode!r}; expected one of {IMAGE_MODES}")
    path = doc.get("path")
    data = doc.get("data")
    media_type = doc.get("media_type")
    if mode == "path":
        if not isinstance(path, str) or not path:
            raise ProtocolError(f"{prefix}path", "path mode requires a non-empty path")
        if data is not None or media_type is not None:
            raise ProtocolError(f"{prefix}data",
                                "path mode must not carry inline data")
        return ImagePayload(mode="path", path=path)
    if not isinstance(data, str) or not data:
        raise ProtocolError(f"{prefix}data", "inline mode requires base64 data")
    try:
        base64.b64decode(data, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise ProtocolError(f"{prefix}data", f"invalid base64: {exc}") from exc
    if media_type != INLINE_MEDIA_TYPE:
        raise ProtocolError(f"{prefix}media_type",
                            f"inline images must declare {INLINE_MEDIA_TYPE!r}")
    if path is not None:
        raise ProtocolError(f"{prefix}path", "inline mode must not carry a path")
    return ImagePayload(mode="inline", data=data, media_type=media_type)


def image_to_dict(payload: ImagePayload) -> dict:
    doc: dict = {"mode": payload.mode}
    if payload.mode == "path":
        doc["path"] = payload.path
    else:
        doc["data"] = payload.data
        doc["media_type"] = payload.media_type
    return doc


def request_from_dict(doc: dict) -> PolicyRequest:
    if not isinstance(doc, dict):
        raise ProtocolError("body", "request body must be a JSON object")
    episode_id = _require(doc, "episode_id", str)
    if not episode_id:
        raise ProtocolError("episode_id", "must be non-empty")
    frame_index = _require(doc, "frame_index", int)
    if frame_index < 0:
        raise ProtocolError("frame_index", "must be >= 0")
    qid = _require(doc, "qid", int)
    if qid <= 0:
        raise ProtocolError("qid", "must be a positive question id")
    prompt = _require(doc, "prompt", str)
    if not prompt:
        raise ProtocolError("prompt", "must be non-empty")
    answer_kind = doc.get("answer_kind", "free-text")
    if answer_kind not in ANSWER_KINDS:
        raise ProtocolError("answer_kind",
                            f"unknown kind {answer_kind!r}; expected one of {ANSWER_KINDS}")
    raw_images = doc.get("images", [])
    if not isinstance(raw_images, list):
        raise ProtocolError("images", "must be a list")
    images = tuple(image_from_dict(item) for item in raw_images)
    return PolicyRequest(episode_id=episode_id, frame_index=frame_index, qid=qid,
                         prompt=prompt, images=images, answer_kind=answer_kind)


def request_to_dict(request: PolicyRequest) -> dict:
    return {
        "episode_id": request.episode_id,
        "frame_index": request.frame_index,
        "qid": request.qid,
        "prompt": request.prompt,
        "images": [image_to_dict(img) for img in request.images],
        "answer_kind": request.answer_kind,
    }


def response_from_dict(doc: dict) -> PolicyResponse:
    if not isinstance(doc, dict):
        raise ProtocolError("body", "response body must be a JSON object")
    answer = _require(doc, "answer", str)
    latency_ms = float(_require(doc, "latency_ms", float)) if "latency_ms" in doc else 0.0
    model_id = _require(doc, "model_id", str) if "model_id" in doc else ""
    return PolicyResponse(answer=answer, latency_ms=latency_ms, model_id=model_id)


def response_to_dict(response: PolicyResponse) -> dict:
    return {
        "answer": response.answer,
        "latency_ms": response.latency_ms,
        "model_id": response.model_id,
    }
