"""Rule-based driving expert: OOD recovery, decisions, ground-truth answers."""
from .answers import TUNNEL_SENTENCE, annotate_frame, answer_question
from .decide import (ExpertDecision, ImportanceRecord, SceneAnalysis, analyze,
                     expert_decide, is_dangerous, rank_important_objects)
from .ood import OODStatus, classify_ood
from .questions import (MANDATED_QIDS, QAPair, QuestionSpec,
                        UnknownQuestionError, question, register_question,
                        registered_qids)

__all__ = [
    "ExpertDecision", "ImportanceRecord", "MANDATED_QIDS", "OODStatus",
    "QAPair", "QuestionSpec", "SceneAnalysis", "TUNNEL_SENTENCE",
    "UnknownQuestionError", "analyze", "annotate_frame", "answer_question",
    "classify_ood", "expert_decide", "is_dangerous", "question",
    "rank_important_objects", "register_question", "registered_qids",
]
