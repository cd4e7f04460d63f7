"""Answer parsing and condition grading.

The deterministic judge is the default: it extracts labeled object ids,
per-object condition texts, action keys and yes/no polarity with fixed rules,
so scores are reproducible bit for bit. An HTTP adapter with the same contract
can replace it when a learned grader is wanted.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import requests

from ..action.keys import ActionKeys, extract_keys

_ID_RE = re.compile(r"\(id:\s*([A-Za-z0-9_.\-]+)\)")
_TOKEN_RE = re.compile(r"[a-z0-9]+")
_NUMBER_RE = re.compile(r"(\d+(?:\.\d+)?)\s*(km/h|kmh|m/s|mps)?", re.IGNORECASE)
_NONE_HINTS = ("there are no", "there is no", "none", "nothing")


class JudgeError(RuntimeError):
    """The grader could not be reached or returned garbage."""


@dataclass
class JudgeVerdict:
    """Parsed view of one answer, produced by a judge."""
    ranked_ids: list[str] = field(default_factory=list)
    conditions: dict[str, str] = field(default_factory=dict)
    keys: ActionKeys = field(default_factory=ActionKeys)
    explicit_none: bool = False
    parse_ok: bool = True


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def token_f1(pred: str, gt: str) -> float:
    """Unigram set overlap; both empty counts as full agreement."""
    p, g = set(tokenize(pred)), set(tokenize(gt))
    if not p and not g:
        return 1.0
    if not p or not g:
        return 0.0
    tp = len(p & g)
    if tp == 0:
        return 0.0
    precision, recall = tp / len(p), tp / len(g)
    return 2 * precision * recall / (precision + recall)


def parse_yes_no(text: str) -> bool | None:
    m = re.search(r"\b(yes|no)\b", text, re.IGNORECASE)
    if m:
        return m.group(1).lower() == "yes"
    low = text.lower()
    if "does not need" in low or "no need" in low or "not necessary" in low:
        return False
    if "needs to" in low or "must" in low:
        return True
    return None


def parse_speed_value_kmh(text: str) -> float | None:
    for m in _NUMBER_RE.finditer(text):
        value = float(m.group(1))
        unit = (m.group(2) or "").lower()
        if unit in ("m/s", "mps"):
            return value * 3.6
        return value  # bare numbers in these answers are km/h
    return None


class DeterministicJudge:
    """Rule-based parser/grader; no randomness, no external calls."""

    def parse(self, answer: str) -> JudgeVerdict:
        verdict = JudgeVerdict()
        seen: set[str] = set()
        matches = list(_ID_RE.finditer(answer))
        for m in matches:
            oid = m.group(1)
            if oid not in seen:
                seen.add(oid)
                verdict.ranked_ids.append(oid)
        # condition text for each id: everything up to the next labeled id
        for i, m in enumerate(matches):
            start = m.end()
            end = matches[i + 1].start() if i + 1 < len(matches) else len(answer)
            if m.group(1) not in verdict.conditions:
                verdict.conditions[m.group(1)] = answer[start:end].strip(" .;:,\n")
        verdict.keys = extract_keys(answer)
        low = answer.lower()
        verdict.explicit_none = not matches and any(h in low for h in _NONE_HINTS)
        verdict.parse_ok = bool(matches) or verdict.explicit_none or bool(answer.strip())
        return verdict

    def grade_condition(self, predicted: str, expected: str) -> float:
        return token_f1(predicted, expected)


class ExternalJudgeClient:
    """POSTs {answer, expected} to a grading endpoint with the same contract."""

    def __init__(self, endpoint: str, timeout: float = 60.0) -> None:
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self._fallback = DeterministicJudge()

    def parse(self, answer: str) -> JudgeVerdict:
        payload = self._post("/parse", {"answer": answer})
        base = self._fallback.parse(answer)
        return JudgeVerdict(
            ranked_ids=list(payload.get("ranked_ids", base.ranked_ids)),
            conditions=dict(payload.get("conditions", base.conditions)),
            keys=ActionKeys(payload.get("direction", base.keys.direction),
                            payload.get("speed", base.keys.speed)),
            explicit_none=bool(payload.get("explicit_none", base.explicit_none)),
            parse_ok=bool(payload.get("parse_ok", base.parse_ok)),
        )

    def grade_condition(self, predicted: str, expected: str) -> float:
        payload = self._post("/grade", {"predicted": predicted, "expected": expected})
        try:
            return max(0.0, min(1.0, float(payload["score"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise JudgeError(f"bad grade payload: {payload!r}") from exc

    def _post(self, path: str, body: dict) -> dict:
        try:
            resp = requests.post(self.endpoint + path, json=body, timeout=self.timeout)
        except (requests.ConnectionError, requests.Timeout) as exc:
            raise JudgeError(f"judge unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise JudgeError(f"judge returned {resp.status_code}")
        try:
            return resp.json()
        except json.JSONDecodeError as exc:
            raise JudgeError("judge returned non-JSON") from exc
