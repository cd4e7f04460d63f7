"""Offline grading of predicted answers against ground-truth QA records."""
from .judge import (DeterministicJudge, ExternalJudgeClient, JudgeError,
                    JudgeVerdict, parse_speed_value_kmh, parse_yes_no, token_f1)
from .rubric import (ACTION_QIDS, COLUMN_BY_QID, GUIDELINE_QIDS, MULTI_QIDS,
                     RANKED_QIDS, REPORT_COLUMNS, ScoreBreakdown,
                     SpeedPenaltyTable, ndcg, score_answer, weighted_f1)
from .weights import (ScoreWeights, extra_penalty_weight, importance_weights,
                      position_weights)

__all__ = [
    "ACTION_QIDS", "COLUMN_BY_QID", "DeterministicJudge", "ExternalJudgeClient",
    "GUIDELINE_QIDS", "JudgeError", "JudgeVerdict", "MULTI_QIDS", "RANKED_QIDS",
    "REPORT_COLUMNS", "ScoreBreakdown", "ScoreWeights", "SpeedPenaltyTable",
    "extra_penalty_weight", "importance_weights", "ndcg", "parse_speed_value_kmh",
    "parse_yes_no", "position_weights", "score_answer", "token_f1", "weighted_f1",
]
