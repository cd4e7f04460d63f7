"""Question registry and QA record types."""
from __future__ import annotations

from dataclasses import dataclass, field


class UnknownQuestionError(KeyError):
    """Raised for a qid that was never registered."""


@dataclass(frozen=True)
class QuestionSpec:
    qid: int
    category: str        # perception | prediction | planning | behavior
    template: str
    answer_kind: str     # free-text | ranked-object-list | object-condition-list | key-value


@dataclass
class QAPair:
    qid: int
    question_text: str
    gt_answer_text: str
    gt_payload: dict | None
    frame_index: int = 0

    def to_dict(self) -> dict:
        return {
            "qid": self.qid,
            "question": self.question_text,
            "answer": self.gt_answer_text,
            "payload": self.gt_payload,
            "frame_index": self.frame_index,
        }

    @staticmethod
    def from_dict(data: dict) -> "QAPair":
        return QAPair(qid=int(data["qid"]),
                      question_text=str(data.get("question", "")),
                      gt_answer_text=str(data.get("answer", "")),
                      gt_payload=data.get("payload"),
                      frame_index=int(data.get("frame_index", 0)))


MANDATED_QIDS = (19, 15, 7, 24, 13, 47, 8, 43, 50)

_BUILTIN = (
    QuestionSpec(19, "perception",
                 "What are the important objects in the current scene? "
                 "List them from most to least important.",
                 "ranked-object-list"),
    QuestionSpec(15, "perception",
                 "Which traffic lights and signs currently affect the ego vehicle, "
                 "and what should the ego vehicle do in response to each?",
                 "object-condition-list"),
    QuestionSpec(7, "perception",
                 "What is the current speed limit?",
                 "free-text"),
    QuestionSpec(24, "prediction",
                 "At what rough speed and in which direction are the nearby "
                 "vehicles moving?",
                 "object-condition-list"),
    QuestionSpec(13, "planning",
                 "Does the ego vehicle need to change lanes now? "
                 "If so, to which side and why?",
                 "free-text"),
    QuestionSpec(47, "prediction",
                 "Which vehicles could the ego vehicle collide with, why, "
                 "and what ego action would lead to a collision?",
                 "object-condition-list"),
    QuestionSpec(8, "planning",
                 "Does the ego vehicle need to brake? Why or why not?",
                 "free-text"),
    QuestionSpec(43, "behavior",
                 "Describe the action the ego vehicle should take now and why.",
                 "free-text"),
    QuestionSpec(50, "behavior",
                 "Provide the appropriate behavior for the ego vehicle as one "
                 "direction key and one speed key.",
                 "key-value"),
    # registry extension beyond the mandated set
    QuestionSpec(37, "perception",
                 "What is the current time of day and weather?",
                 "free-text"),
)

_REGISTRY: dict[int, QuestionSpec] = {q.qid: q for q in _BUILTIN}


def register_question(spec: QuestionSpec) -> None:
    _REGISTRY[spec.qid] = spec


def question(qid: int) -> QuestionSpec:
    try:
        return _REGISTRY[qid]
    except KeyError:
        raise UnknownQuestionError(
            f"qid {qid} is not registered; registered qids: "
            f"{sorted(_REGISTRY)}") from None


def registered_qids() -> tuple[int, ...]:
    return tuple(sorted(_REGISTRY))
