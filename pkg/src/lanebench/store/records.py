"""Stored record shapes, schema validation, and store error types."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from ..expert.questions import QAPair

STATUSES = ("raw", "controversial", "verified")

# Legal status transitions; a record never returns to raw.
_ALLOWED_TRANSITIONS = {
    ("raw", "controversial"), ("raw", "verified"),
    ("controversial", "verified"), ("verified", "controversial"),
}

_KNOWN_FRAME_FIELDS = ("scenario", "frame_index", "qa_pairs", "policy_answers",
                       "images", "status")


class StoreError(Exception):
    pass


class FrameNotFoundError(StoreError):
    pass


class StoreValidationError(StoreError):
    """A stored document violates its schema; carries the failing JSON path."""

    def __init__(self, message: str, json_path: str = "$"):
        super().__init__(f"{json_path}: {message}")
        self.json_path = json_path


class StatusTransitionError(StoreError):
    pass


class UnknownQidError(StoreError):
    pass


@dataclass
class FrameRecord:
    scenario: str
    frame_index: int
    qa_pairs: list[QAPair] = field(default_factory=list)
    policy_answers: dict[int, str] = field(default_factory=dict)
    images: list[str] = field(default_factory=list)
    status: str = "raw"
    # unknown top-level fields are preserved verbatim for forward compatibility
    extras: dict = field(default_factory=dict)

    def qa(self, qid: int) -> QAPair:
        for pair in self.qa_pairs:
            if pair.qid == qid:
                return pair
        raise UnknownQidError(
            f"frame {self.frame_index} of {self.scenario!r} has no qid {qid}; "
            f"present: {sorted(p.qid for p in self.qa_pairs)}")

    def to_dict(self) -> dict:
        doc = {
            "scenario": self.scenario,
            "frame_index": self.frame_index,
            "qa_pairs": [pair.to_dict() for pair in self.qa_pairs],
            "policy_answers": {str(qid): text
                               for qid, text in sorted(self.policy_answers.items())},
            "images": list(self.images),
            "status": self.status,
        }
        for key, value in self.extras.items():
            if key not in _KNOWN_FRAME_FIELDS:
                doc[key] = value
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "FrameRecord":
        validate_frame_doc(doc)
        return cls(
            scenario=doc["scenario"],
            frame_index=int(doc["frame_index"]),
            qa_pairs=[QAPair.from_dict(item) for item in doc["qa_pairs"]],
            policy_answers={int(k): v
                            for k, v in doc.get("policy_answers", {}).items()},
            images=list(doc.get("images", [])),
            status=doc["status"],
            extras={k: v for k, v in doc.items() if k not in _KNOWN_FRAME_FIELDS},
        )


@dataclass(frozen=True)
class EditRecord:
    scenario: str
    frame_index: int
    qid: int
    old_value: str
    new_value: str
    timestamp: float
    marked_controversial: bool = False

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "frame_index": self.frame_index,
            "qid": self.qid,
            "old_value": self.old_value,
            "new_value": self.new_value,
            "timestamp": self.timestamp,
            "marked_controversial": self.marked_controversial,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EditRecord":
        validate_edit_doc(doc)
        return cls(
            scenario=doc["scenario"],
            frame_index=int(doc["frame_index"]),
            qid=int(doc["qid"]),
            old_value=doc["old_value"],
            new_value=doc["new_value"],
            timestamp=float(doc["timestamp"]),
            marked_controversial=bool(doc.get("marked_controversial", False)),
        )


def check_transition(old: str, new: str) -> None:
    if new not in STATUSES:
        raise StatusTransitionError(
            f"unknown status {new!r}; expected one of {STATUSES}")
    if old == new:
        return
    if (old, new) not in _ALLOWED_TRANSITIONS:
        raise StatusTransitionError(f"illegal status transition {old!r} -> {new!r}")


def _load_schema(name: str) -> dict:
    ref = resources.files("lanebench.schemas").joinpath(name)
    return json.loads(ref.read_text(encoding="utf-8"))


_FRAME_VALIDATOR = jsonschema.Draft202012Validator(_load_schema("frame_record.schema.json"))
_EDIT_VALIDATOR = jsonschema.Draft202012Validator(_load_schema("edit_record.schema.json"))


def _validate(validator: jsonschema.Draft202012Validator, doc) -> None:
    error = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if error is not None:
        raise StoreValidationError(error.message, json_path=error.json_path)


def validate_frame_doc(doc) -> None:
    _validate(_FRAME_VALIDATOR, doc)


def validate_edit_doc(doc) -> None:
    _validate(_EDIT_VALIDATOR, doc)
