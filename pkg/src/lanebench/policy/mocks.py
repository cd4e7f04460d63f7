"""Built-in deterministic policies used by the runner and the test suite."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from ..action import DIRECTION_KEYS, SPEED_KEYS, extract_keys
from .protocol import PolicyRequest, PolicyResponse


class EchoPolicy:
    """Answers with the final non-empty line of the prompt. Plumbing checks."""

    name = "echo"

    def answer(self, request: PolicyRequest) -> PolicyResponse:
        lines = [ln.strip() for ln in request.prompt.splitlines() if ln.strip()]
        text = lines[-1] if lines else ""
        return PolicyResponse(answer=text, model_id=self.name)


class ConstantPolicy:
    """Always the same answer, regardless of the question."""

    name = "constant"

    def __init__(self, answer: str = "FOLLOW_LANE, KEEP"):
        self._answer = answer

    def answer(self, request: PolicyRequest) -> PolicyResponse:
        return PolicyResponse(answer=self._answer, model_id=self.name)


@dataclass
class GTTable:
    """Ground-truth answers keyed by (episode_id, frame_index, qid).

    The runner computes the expert annotation for each intervention frame and
    records it here before the chain executor asks the policy anything.
    """

    answers: dict[tuple[str, int, int], str] = field(default_factory=dict)

    def put(self, episode_id: str, frame_index: int, qid: int, answer: str) -> None:
        self.answers[(episode_id, frame_index, qid)] = answer

    def get(self, episode_id: str, frame_index: int, qid: int) -> str:
        key = (episode_id, frame_index, qid)
        if key not in self.answers:
            raise LookupError(
                f"no ground truth recorded for episode {episode_id!r} "
                f"frame {frame_index} qid {qid}")
        return self.answers[key]


class GTEchoPolicy:
    """Replays the expert's own answer for every question: the upper bound."""

    name = "gt-echo"

    def __init__(self, table: GTTable | None = None):
        self.table = table if table is not None else GTTable()

    def answer(self, request: PolicyRequest) -> PolicyResponse:
        text = self.table.get(request.episode_id, request.frame_index, request.qid)
        return PolicyResponse(answer=text, model_id=self.name)


def cyclic_next(key: str, vocabulary: tuple[str, ...]) -> str:
    """The following entry in the vocabulary; guaranteed different from key."""
    return vocabulary[(vocabulary.index(key) + 1) % len(vocabulary)]


def corruption_draw(seed: int, episode_id: str, frame_index: int, qid: int,
                    keyclass: str) -> float:
    """Deterministic u in [0, 1): common random number per decision site.

    Comparing the same draw against different rates makes the corrupted sets
    nested, so a higher rate corrupts a superset of the frames a lower rate
    corrupts.
    """
    tag = f"{seed}|{episode_id}|{frame_index}|{qid}|{keyclass}"
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") / 2.0 ** 64


class NoisyGTPolicy(GTEchoPolicy):
    """Ground-truth replay with action keys corrupted at a fixed rate.

    Each action answer's direction and speed key is independently replaced by
    the next key in its vocabulary when its draw falls below the rate. At rate
    zero the output is byte-identical to gt-echo.
    """

    name = "noisy-gt"

    def __init__(self, table: GTTable | None = None, rate: float = 0.0,
                 seed: int = 0):
        super().__init__(table)
        if not 0.0 <= rate <= 1.0:
            raise ValueError(f"rate must lie in [0, 1], got {rate}")
        self.rate = rate
        self.seed = seed

    def answer(self, request: PolicyRequest) -> PolicyResponse:
        text = self.table.get(request.episode_id, request.frame_index, request.qid)
        if request.qid in (43, 50) and self.rate > 0.0:
            text = self._corrupt(text, request)
        return PolicyResponse(answer=text, model_id=f"{self.name}:{self.rate}")

    def _corrupt(self, text: str, request: PolicyRequest) -> str:
        keys = extract_keys(text)
        if keys.direction is None or keys.speed is None:
            return text
        direction, speed = keys.direction, keys.speed
        if corruption_draw(self.seed, request.episode_id, request.frame_index,
                           request.qid, "direction") < self.rate:
            direction = cyclic_next(direction, DIRECTION_KEYS)
        if corruption_draw(self.seed, request.episode_id, request.frame_index,
                           request.qid, "speed") < self.rate:
            speed = cyclic_next(speed, SPEED_KEYS)
        if direction == keys.direction and speed == keys.speed:
            return text
        if request.qid == 50:
            return f"{direction}, {speed}"
        head, sep, _ = text.rpartition("Final action:")
        if not sep:
            return text
        return f"{head}{sep} {direction}, {speed}."


class ScriptedPolicy:
    """Answers from a JSON fixture; exact (episode, frame, qid) lookup."""

    name = "scripted"

    def __init__(self, path: str):
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        self._default = doc.get("default")
        self._answers: dict[tuple[str, int, int], str] = {}
        for row in doc.get("answers", []):
            key = (row["episode_id"], int(row["frame_index"]), int(row["qid"]))
            self._answers[key] = row["answer"]

    def answer(self, request: PolicyRequest) -> PolicyResponse:
        key = (request.episode_id, request.frame_index, request.qid)
        text = self._answers.get(key, self._default)
        if text is None:
            raise LookupError(f"scripted fixture has no answer for {key} "
                              "and no default")
        return PolicyResponse(answer=text, model_id=self.name)


_FACTORIES = {
    "echo": lambda **opts: EchoPolicy(),
    "constant": lambda **opts: ConstantPolicy(**opts),
    "gt-echo": lambda **opts: GTEchoPolicy(**opts),
    "noisy-gt": lambda **opts: NoisyGTPolicy(**opts),
    "scripted": lambda **opts: ScriptedPolicy(**opts),
}


def policy_names() -> tuple[str, ...]:
    return tuple(sorted(_FACTORIES))


def create_policy(name: str, **options):
    if name not in _FACTORIES:
        raise ValueError(f"unknown policy {name!r}; available: "
                         f"{', '.join(policy_names())}")
    try:
        return _FACTORIES[name](**options)
    except TypeError as exc:
        raise ValueError(f"bad options for policy {name!r}: {exc}") from exc
