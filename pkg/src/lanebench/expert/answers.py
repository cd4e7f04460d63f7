"""Ground-truth answer generation for the registered questions.

Multi-object answers lead each segment with the "(id: ...)" label so a parser
can attribute the following condition text to that object unambiguously; the
structured payload repeats the same text, which is what makes the expert's own
answers score perfectly under the deterministic rubric.
"""
from __future__ import annotations

from ..world import WorldState
from ..world.perception import (motion_sector, position_sector, relevant_actors,
                                speed_bucket)
from .decide import (ExpertDecision, SceneAnalysis, analyze, expert_decide)
from .ood import OODStatus, classify_ood
from .questions import MANDATED_QIDS, QAPair, question

TUNNEL_SENTENCE = ("It is impossible to infer the current time and weather "
                   "from visual information, because the ego vehicle is "
                   "currently inside a tunnel.")


def _display_name(world: WorldState, actor_id: str) -> str:
    try:
        actor = world.actor(actor_id)
    except KeyError:
        return f"object {actor_id}"
    return actor.name or f"the {actor.kind} {actor.id}"


def _control_label(note) -> str:
    if note.kind == "traffic-light":
        return f"The traffic light showing {note.state}"
    if note.kind == "stop-sign":
        return "The stop sign"
    if note.kind == "speed-limit-sign":
        return "The speed-limit sign"
    return "The road sign"


def _answer_ranked_objects(world: WorldState, analysis: SceneAnalysis) -> tuple[str, dict]:
    recs = analysis.ranking
    if not recs:
        return ("There are no important objects in the current scene.",
                {"ranking": []})
    listed = ", ".join(f"{_display_name(world, r.actor_id)} (id: {r.actor_id})"
                       for r in recs)
    payload = {"ranking": [{"id": r.actor_id, "is_role": r.is_role,
                            "is_dangerous": r.is_dangerous,
                            "distance": round(r.distance, 1)} for r in recs]}
    return (f"The important objects, from most to least important, are: "
            f"{listed}.", payload)


def _answer_controls(analysis: SceneAnalysis) -> tuple[str, dict]:
    notes = analysis.controls
    if not notes:
        return ("There are no traffic lights or signs that currently affect "
                "the ego vehicle.", {"controls": []})
    segments, entries = [], []
    for note in notes:
        cond = (f"{_control_label(note)} is {note.distance:.0f} m ahead; "
                f"the ego vehicle should {note.required}.")
        segments.append(f"(id: {note.control_id}) {cond}")
        entries.append({"id": note.control_id, "is_role": False,
                        "is_dangerous": note.demands_brake, "text": cond})
    return " ".join(segments), {"controls": entries}


def _answer_speed_limit(world: WorldState, analysis: SceneAnalysis) -> tuple[str, dict]:
    limit = analysis.speed_limit
    if limit is None:
        return "No speed limit is currently posted.", {"limit_mps": None}
    kmh = limit * 3.6
    if world.ego.remembered_speed_limit is not None:
        text = (f"The current speed limit is {kmh:.0f} km/h, set by the last "
                "speed-limit sign the ego vehicle passed.")
    else:
        text = f"The current speed limit is {kmh:.0f} km/h."
    return text, {"limit_mps": limit}


def _answer_vehicle_motion(world: WorldState, analysis: SceneAnalysis) -> tuple[str, dict]:
    moving_kinds = ("vehicle", "bicycle")
    ordered = [r for r in analysis.ranking
               if r.actor_id in {a.id for a in relevant_actors(world, moving_kinds)}]
    if not ordered:
        return "There are no notable vehicles nearby.", {"vehicles": []}
    segments, entries = [], []
    for record in ordered:
        actor = world.actor(record.actor_id)
        name = _display_name(world, record.actor_id)
        bucket = speed_bucket(actor.speed)
        if bucket == "stationary":
            cond = (f"{name} is stationary, positioned to the "
                    f"{position_sector(world, actor)} of the ego vehicle.")
        else:
            cond = (f"{name} is moving at a {bucket} speed toward the "
                    f"{motion_sector(world, actor)}, positioned to the "
                    f"{position_sector(world, actor)} of the ego vehicle.")
        segments.append(f"(id: {record.actor_id}) {cond}")
        entries.append({"id": record.actor_id, "is_role": record.is_role,
                        "is_dangerous": record.is_dangerous, "text": cond})
    return " ".join(segments), {"vehicles": entries}


def _answer_lane_change(decision: ExpertDecision) -> tuple[str, dict]:
    must = decision.direction in ("CHANGE_LANE_LEFT", "CHANGE_LANE_RIGHT")
    if must:
        side = "left" if decision.direction.endswith("LEFT") else "right"
        text = (f"Yes, the ego vehicle needs to change lanes to the {side} "
                f"now; it should {decision.direction_phrase}.")
    else:
        text = (f"No, the ego vehicle does not need to change lanes now; "
                f"it should {decision.direction_phrase}.")
    return text, {"must_change": must,
                  "direction": decision.direction if must else None}


def _answer_overlap(world: WorldState, analysis: SceneAnalysis) -> tuple[str, dict]:
    threats = [r for r in analysis.ranking if r.is_dangerous]
    if not threats:
        return ("There are no vehicles on a collision course with the ego "
                "vehicle.", {"vehicles": []})
    block_id = analysis.block.actor_id if analysis.block else None
    invader_id = analysis.invader.actor_id if analysis.invader else None
    lead_id = analysis.lead.actor_id if analysis.lead else None
    segments, entries = [], []
    for record in threats:
        name = _display_name(world, record.actor_id)
        if record.actor_id == block_id:
            why = "it is stopped in the ego lane ahead"
            cause = "holding the current course without changing lanes or stopping"
        elif record.actor_id == invader_id:
            why = "it is oncoming and cutting into the ego lane"
            cause = "staying at the lane center instead of shifting away"
        elif record.actor_id == lead_id:
            why = "it is traveling ahead in the ego lane more slowly"
            cause = "closing the gap without leaving braking room"
        else:
            why = "its predicted path crosses the ego route ahead"
            cause = "proceeding without yielding to it"
        cond = (f"{name} could collide with the ego vehicle because {why}; "
                f"a collision would follow from {cause}.")
        segments.append(f"(id: {record.actor_id}) {cond}")
        entries.append({"id": record.actor_id, "is_role": record.is_role,
                        "is_dangerous": True, "text": cond})
    return " ".join(segments), {"vehicles": entries}


def _answer_brake(world: WorldState, decision: ExpertDecision) -> tuple[str, dict]:
    stationary_hold = world.ego.speed < 0.1 and decision.speed == "STOP"
    needs = decision.speed in ("STOP", "DECELERATE")
    if stationary_hold:
        text = (f"The ego vehicle is already stationary and should remain "
                f"stopped: {decision.speed_phrase}.")
    elif needs:
        text = f"Yes, the ego vehicle needs to brake: {decision.speed_phrase}."
    else:
        text = (f"No, the ego vehicle does not need to brake: "
                f"{decision.speed_phrase}.")
    return text, {"needs_brake": needs, "already_stationary": stationary_hold}


def _answer_action_text(decision: ExpertDecision) -> tuple[str, dict]:
    text = (f"The ego vehicle should {decision.direction_phrase} and "
            f"{decision.speed_phrase}. Final action: {decision.direction}, "
            f"{decision.speed}.")
    return text, {"keys": {"direction": decision.direction,
                           "speed": decision.speed},
                  "rationale": decision.rationale}


def _answer_action_keys(decision: ExpertDecision) -> tuple[str, dict]:
    return (f"{decision.direction}, {decision.speed}",
            {"keys": {"direction": decision.direction,
                      "speed": decision.speed}})


def _answer_weather(world: WorldState) -> tuple[str, dict]:
    w = world.weather
    payload = {"in_tunnel": w.in_tunnel, "time_of_day": w.time_of_day,
               "condition": w.condition}
    if w.in_tunnel:
        return TUNNEL_SENTENCE, payload
    return (f"It is currently {w.time_of_day} and the weather is "
            f"{w.condition}.", payload)


def answer_question(world: WorldState, ood: OODStatus, decision: ExpertDecision,
                    qid: int, analysis: SceneAnalysis | None = None) -> QAPair:
    """One ground-truth QA record; raises UnknownQuestionError for bad qids."""
    spec = question(qid)
    analysis = analysis or analyze(world, ood)
    if qid == 19:
        text, payload = _answer_ranked_objects(world, analysis)
    elif qid == 15:
        text, payload = _answer_controls(analysis)
    elif qid == 7:
        text, payload = _answer_speed_limit(world, analysis)
    elif qid == 24:
        text, payload = _answer_vehicle_motion(world, analysis)
    elif qid == 13:
        text, payload = _answer_lane_change(decision)
    elif qid == 47:
        text, payload = _answer_overlap(world, analysis)
    elif qid == 8:
        text, payload = _answer_brake(world, decision)
    elif qid == 43:
        text, payload = _answer_action_text(decision)
    elif qid == 50:
        text, payload = _answer_action_keys(decision)
    elif qid == 37:
        text, payload = _answer_weather(world)
    else:
        text, payload = decision.rationale, {"rationale": decision.rationale}
    return QAPair(qid=qid, question_text=spec.template, gt_answer_text=text,
                  gt_payload=payload, frame_index=world.frame_index)


def annotate_frame(world: WorldState,
                   qids: tuple[int, ...] | list[int] | None = None) -> list[QAPair]:
    """All requested QA pairs for one state, from a single shared analysis."""
    wanted = tuple(qids) if qids is not None else MANDATED_QIDS
    ood = classify_ood(world)
    analysis = analyze(world, ood)
    decision = expert_decide(world, ood, analysis)
    return [answer_question(world, ood, decision, qid, analysis)
            for qid in wanted]
