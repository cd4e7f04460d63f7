"""Per-question scoring rubrics.

Question families:
  * ranked list (19): weighted F1 x NDCG over labeled object ids;
  * multi-object conditions (15, 24, 47): weighted F1 x base-weighted mean of
    per-object condition scores, with family-specific extra-object penalties;
  * action (43, 50): pair F1 over {direction, speed} x speed rank penalty;
  * guideline free text (7, 8, 13, 37): question-specific deterministic rules.

All finals live in [0, 1]; reports show round(100 * final, 2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .judge import DeterministicJudge, JudgeVerdict, parse_speed_value_kmh, parse_yes_no
from .weights import ScoreWeights, extra_penalty_weight, importance_weights
from ..action.keys import SPEED_KEYS

# Table II-style column names, in report order
COLUMN_BY_QID = {19: "Imp. Obj.", 15: "T. Sign", 7: "S. Limit", 47: "Col. Obj.",
                 13: "C. Lane", 8: "Brake", 43: "A. Desc", 50: "A. Keys"}
REPORT_COLUMNS = ("Imp. Obj.", "T. Sign", "S. Limit", "Col. Obj.",
                  "C. Lane", "Brake", "A. Desc", "A. Keys")

RANKED_QIDS = (19,)
MULTI_QIDS = (15, 24, 47)
ACTION_QIDS = (43, 50)
GUIDELINE_QIDS = (7, 8, 13, 37)

# extra-object weight per multi-object family: harmless extras cost little,
# extras on the collision question signal reasoning errors and cost more
MULTI_EXTRA_WEIGHT = {15: 0.25, 24: 0.25, 47: 1.5}


@dataclass(frozen=True)
class SpeedPenaltyTable:
    """Penalty multiplier for a predicted speed key given the expected one.

    Rows = predicted, columns = expected. Constraints baked into the default:
    exact matches are free; over-prediction toward danger is punished hardest,
    with (ACCELERATE | STOP) the strict minimum at 0; predicting ACCELERATE
    when KEEP is expected is mildly favorable and costs nothing; conservative
    under-prediction decays gently with rank distance.

            expected:  STOP  DECELERATE  KEEP  ACCELERATE
    pred STOP          1.00       0.85   0.70        0.55
    pred DECELERATE    0.50       1.00   0.85        0.70
    pred KEEP          0.25       0.60   1.00        0.85
    pred ACCELERATE    0.00       0.35   1.00        1.00
    """
    table: tuple[tuple[float, ...], ...]

    @staticmethod
    def default() -> "SpeedPenaltyTable":
        order = ("STOP", "DECELERATE", "KEEP", "ACCELERATE")
        rows = {
            "STOP":       (1.00, 0.85, 0.70, 0.55),
            "DECELERATE": (0.50, 1.00, 0.85, 0.70),
            "KEEP":       (0.25, 0.60, 1.00, 0.85),
            "ACCELERATE": (0.00, 0.35, 1.00, 1.00),
        }
        idx = {k: order.index(k) for k in SPEED_KEYS}
        full = [[0.0] * len(SPEED_KEYS) for _ in SPEED_KEYS]
        for p in SPEED_KEYS:
            for g in SPEED_KEYS:
                full[idx[p]][idx[g]] = rows[p][order.index(g)]
        return SpeedPenaltyTable(tuple(tuple(r) for r in full))

    def penalty(self, predicted: str | None, expected: str) -> float:
        if predicted is None:
            return 1.0  # absence is already charged through the pair F1
        order = ("STOP", "DECELERATE", "KEEP", "ACCELERATE")
        return self.table[order.index(predicted)][order.index(expected)]


def ndcg(predicted: list[str], gt_order: list[str], gt_weight: dict[str, float]) -> float:
    """Rank quality on the overlapping objects, 0 when nothing overlaps."""
    overlap = [p for p in predicted if p in gt_weight]
    if not overlap:
        return 0.0
    dcg = sum(gt_weight[p] / math.log2(i + 2) for i, p in enumerate(overlap))
    ideal = sorted((gt_weight[p] for p in overlap), reverse=True)
    idcg = sum(w / math.log2(i + 2) for i, w in enumerate(ideal))
    return dcg / idcg if idcg > 0 else 0.0


def weighted_f1(predicted: list[str], gt_weight: dict[str, float],
                extra_weight: float) -> tuple[float, float, float]:
    """(precision, recall, f1) with weighted hits/misses and flat extra charges."""
    tp = sum(w for oid, w in gt_weight.items() if oid in predicted)
    fn = sum(w for oid, w in gt_weight.items() if oid not in predicted)
    fp = extra_weight * sum(1 for p in predicted if p not in gt_weight)
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall > 0 else 0.0)
    return precision, recall, f1


@dataclass
class ScoreBreakdown:
    qid: int
    final: float
    precision: float | None = None
    recall: float | None = None
    f1: float | None = None
    ndcg: float | None = None
    condition_mean: float | None = None
    speed_penalty: float | None = None
    flag: str | None = None

    @property
    def reported(self) -> float:
        return round(100.0 * self.final, 2)


def _gt_objects(gt_payload: dict, key: str) -> list[dict]:
    return list(gt_payload.get(key) or [])


def score_answer(qid: int, answer: str, gt: dict, weights: ScoreWeights,
                 judge: DeterministicJudge | None = None,
                 penalty_table: SpeedPenaltyTable | None = None) -> ScoreBreakdown:
    """Grade one predicted answer against a ground-truth QA record.

    `gt` carries at least {"answer": str, "payload": dict | None}.
    """
    judge = judge or DeterministicJudge()
    table = penalty_table or SpeedPenaltyTable.default()
    payload = gt.get("payload") or {}
    verdict = judge.parse(answer)

    if qid in RANKED_QIDS:
        return _score_ranked(qid, verdict, payload, weights)
    if qid in MULTI_QIDS:
        return _score_multi(qid, verdict, payload, weights, judge)
    if qid in ACTION_QIDS:
        return _score_action(qid, verdict, payload, table)
    return _score_guideline(qid, answer, verdict, gt, judge)


def _score_ranked(qid: int, verdict: JudgeVerdict, payload: dict,
                  weights: ScoreWeights) -> ScoreBreakdown:
    gt_list = _gt_objects(payload, "ranking")
    gt_flags = [(o["id"], bool(o.get("is_role")) or bool(o.get("is_dangerous")))
                for o in gt_list]
    if not gt_flags:
        final = 1.0 if (verdict.explicit_none or not verdict.ranked_ids) else 0.0
        return ScoreBreakdown(qid=qid, final=final, f1=final, ndcg=final,
                              flag=None if final else "extra objects on empty scene")
    if not verdict.ranked_ids:
        return ScoreBreakdown(qid=qid, final=0.0, f1=0.0, ndcg=0.0,
                              flag="no labeled objects parsed")
    w = dict(zip([g[0] for g in gt_flags], importance_weights(gt_flags, weights)))
    extra_w = extra_penalty_weight(len(gt_flags), weights)
    precision, recall, f1 = weighted_f1(verdict.ranked_ids, w, extra_w)
    rank_quality = ndcg(verdict.ranked_ids, [g[0] for g in gt_flags], w)
    return ScoreBreakdown(qid=qid, final=f1 * rank_quality, precision=precision,
                          recall=recall, f1=f1, ndcg=rank_quality)


def _score_multi(qid: int, verdict: JudgeVerdict, payload: dict,
                 weights: ScoreWeights, judge: DeterministicJudge) -> ScoreBreakdown:
    key = "controls" if qid == 15 else "vehicles"
    gt_list = _gt_objects(payload, key)
    if not gt_list:
        final = 1.0 if (verdict.explicit_none or not verdict.ranked_ids) else 0.0
        return ScoreBreakdown(qid=qid, final=final, f1=final, condition_mean=final,
                              flag=None if final else "extra objects on empty scene")
    if not verdict.ranked_ids:
        return ScoreBreakdown(qid=qid, final=0.0, f1=0.0, condition_mean=0.0,
                              flag="no labeled objects parsed")
    gt_flags = [(o["id"], bool(o.get("is_role")) or bool(o.get("is_dangerous")))
                for o in gt_list]
    w = dict(zip([g[0] for g in gt_flags], importance_weights(gt_flags, weights)))
    precision, recall, f1 = weighted_f1(verdict.ranked_ids, w, MULTI_EXTRA_WEIGHT[qid])
    base = {o["id"]: (weights.special_base if flag else weights.plain_base)
            for o, (_, flag) in zip(gt_list, gt_flags)}
    expected = {o["id"]: str(o.get("text") or "") for o in gt_list}
    matched = [oid for oid in verdict.ranked_ids if oid in expected]
    if matched:
        num = sum(judge.grade_condition(verdict.conditions.get(oid, ""), expected[oid])
                  * base[oid] for oid in matched)
        den = sum(base[oid] for oid in matched)
        cond = num / den
    else:
        cond = 0.0
    return ScoreBreakdown(qid=qid, final=f1 * cond, precision=precision, recall=recall,
                          f1=f1, condition_mean=cond)


def _score_action(qid: int, verdict: JudgeVerdict, payload: dict,
                  table: SpeedPenaltyTable) -> ScoreBreakdown:
    gt_keys = payload.get("keys") or {}
    gt_dir, gt_speed = gt_keys.get("direction"), gt_keys.get("speed")
    pred = verdict.keys
    if pred.direction is None and pred.speed is None:
        return ScoreBreakdown(qid=qid, final=0.0, f1=0.0, flag="no extractable keys")
    matches = 0
    if gt_dir is not None and pred.direction == gt_dir:
        matches += 1
    if gt_speed is not None and pred.speed == gt_speed:
        matches += 1
    f1 = matches / 2.0
    penalty = table.penalty(pred.speed, gt_speed) if gt_speed is not None else 1.0
    return ScoreBreakdown(qid=qid, final=f1 * penalty, f1=f1, speed_penalty=penalty)


def _score_guideline(qid: int, answer: str, verdict: JudgeVerdict, gt: dict,
                     judge: DeterministicJudge) -> ScoreBreakdown:
    payload = gt.get("payload") or {}
    gt_answer = str(gt.get("answer") or "")
    if qid == 7:
        return _score_speed_limit(answer, payload, gt_answer)
    if qid == 8:
        return _score_brake(answer, payload, gt_answer, judge)
    if qid == 13:
        return _score_lane_change(answer, payload, gt_answer, judge)
    if qid == 37:
        return _score_weather(answer, payload, gt_answer)
    # unknown guideline question: plain token overlap keeps scoring total
    return ScoreBreakdown(qid=qid, final=judge.grade_condition(answer, gt_answer),
                          flag="generic token overlap")


def _score_speed_limit(answer: str, payload: dict, gt_answer: str) -> ScoreBreakdown:
    gt_mps = payload.get("limit_mps")
    pred_kmh = parse_speed_value_kmh(answer)
    if gt_mps is None:
        low = answer.lower()
        final = 1.0 if pred_kmh is None and ("no" in low and "limit" in low) else 0.0
        return ScoreBreakdown(qid=7, final=final)
    if pred_kmh is None:
        return ScoreBreakdown(qid=7, final=0.0, flag="no numeric limit parsed")
    gt_kmh = gt_mps * 3.6
    if abs(pred_kmh - gt_kmh) <= 0.75:
        return ScoreBreakdown(qid=7, final=1.0)
    rel = abs(pred_kmh - gt_kmh) / gt_kmh
    # claiming a higher limit than posted is worse than a cautious low guess
    final = max(0.0, 1.0 - (2.0 * rel if pred_kmh > gt_kmh else rel))
    return ScoreBreakdown(qid=7, final=final)


_STATIONARY_OK = ("keep the current speed", "stop immediately",
                  "remain at rest", "already stationary", "remain stopped")


def _score_brake(answer: str, payload: dict, gt_answer: str,
                 judge: DeterministicJudge) -> ScoreBreakdown:
    if payload.get("already_stationary"):
        low = answer.lower()
        if any(phrase in low for phrase in _STATIONARY_OK):
            return ScoreBreakdown(qid=8, final=1.0)
    pred = parse_yes_no(answer)
    expected = payload.get("needs_brake")
    if pred is None or expected is None:
        return ScoreBreakdown(qid=8, final=0.0, flag="no yes/no polarity parsed")
    if pred != bool(expected):
        return ScoreBreakdown(qid=8, final=0.0)
    return ScoreBreakdown(qid=8, final=0.5 + 0.5 * judge.grade_condition(answer, gt_answer))


def _score_lane_change(answer: str, payload: dict, gt_answer: str,
                       judge: DeterministicJudge) -> ScoreBreakdown:
    pred = parse_yes_no(answer)
    expected = payload.get("must_change")
    if pred is None or expected is None:
        return ScoreBreakdown(qid=13, final=0.0, flag="no yes/no polarity parsed")
    if pred != bool(expected):
        return ScoreBreakdown(qid=13, final=0.0)
    direction = payload.get("direction") or ""
    side_ok = 1.0
    if expected and direction:
        side = "left" if direction.endswith("LEFT") else "right"
        side_ok = 1.0 if side in answer.lower() else 0.0
    return ScoreBreakdown(
        qid=13,
        final=0.6 * side_ok + 0.4 * judge.grade_condition(answer, gt_answer))


def _score_weather(answer: str, payload: dict, gt_answer: str) -> ScoreBreakdown:
    low = answer.lower()
    if payload.get("in_tunnel"):
        return ScoreBreakdown(qid=37, final=1.0 if "tunnel" in low else 0.0)
    time_ok = str(payload.get("time_of_day", "")) in low
    cond_map = {"clear": "clear", "rain": "rain", "fog": "fog", "flooded": "flood"}
    cond_ok = cond_map.get(str(payload.get("condition", "")), "???") in low
    return ScoreBreakdown(qid=37, final=0.5 * time_ok + 0.5 * cond_ok)
