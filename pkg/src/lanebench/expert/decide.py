"""Scene analysis and the expert's rule cascade.

The expert is a pure function of WorldState: every intervention it classifies
the state, sizes up controls/actors along the travel corridor, and picks one
direction key plus one speed key with human-readable reasons. The same
analysis feeds the ground-truth answers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..action.keys import COMMAND_TO_KEY
from ..geometry import project_to_polyline
from ..world import (WorldState, at_or_entering_junction, control_route_s,
                     effective_speed_limit, junction_maneuver,
                     next_junction_on_route)
from ..world.perception import is_oncoming, relevant_actors
from ..world.types import Actor, Lane
from .ood import OODStatus, SEVERE_ANGLE, classify_ood

EVASION_DISTANCE = 45.0     # start passing a blockage as soon as it is seen here
BLOCK_MAX_GAP = 45.0
STOP_AT_DISTANCE = 12.0     # inside this, a demanded stop means STOP now
SLOW_FROM_DISTANCE = 40.0
LEAD_RANGE = 60.0
HEADWAY_STOP = 1.0          # seconds
HEADWAY_SLOW = 2.0
HEADWAY_HOLD = 3.0
INVADER_RANGE = 40.0
DANGER_HORIZON_S = 4.0
POSTPONE_FLOOR = 4.5        # keep rolling at least this fast while a return waits
INVADER_FLOOR = 4.0
RETURN_BLOCK_BEHIND = 8.0
RETURN_BLOCK_AHEAD = 25.0
OVER_LIMIT_SLACK = 0.3
UNDER_TARGET_SLACK = 0.5

_RESTRICTIVENESS = {"STOP": 0, "DECELERATE": 1, "KEEP": 2, "ACCELERATE": 3}


@dataclass(frozen=True)
class ImportanceRecord:
    actor_id: str
    is_role: bool
    is_dangerous: bool
    distance: float


@dataclass(frozen=True)
class ControlNote:
    control_id: str
    kind: str
    state: str | None
    distance: float          # along the route to the stop point
    required: str            # what the ego vehicle should do about it
    demands_brake: bool


@dataclass(frozen=True)
class LeadNote:
    actor_id: str
    gap: float               # bumper-to-bumper along the corridor
    headway: float           # seconds at current ego speed
    speed: float


@dataclass(frozen=True)
class BlockNote:
    actor_id: str
    gap: float
    route_s: float
    evade_side: str | None   # left | right | None when no legal clear neighbor


@dataclass(frozen=True)
class InvadeNote:
    actor_id: str
    distance: float
    side: str                # side of the route the intruder comes from


@dataclass
class SceneAnalysis:
    ood: OODStatus
    route_s: float
    ranking: list[ImportanceRecord] = field(default_factory=list)
    dangerous_ids: set[str] = field(default_factory=set)
    controls: list[ControlNote] = field(default_factory=list)
    lead: LeadNote | None = None
    block: BlockNote | None = None
    invader: InvadeNote | None = None
    at_junction: bool = False
    junction_key: str = "FOLLOW_LANE"
    speed_limit: float | None = None
    target_speed: float = 8.33
    in_tunnel: bool = False


@dataclass
class ExpertDecision:
    direction: str
    speed: str
    rationale: str
    direction_phrase: str = ""
    speed_phrase: str = ""


def _speed_allowance(distance: float) -> float:
    """Comfortable approach speed toward a stop point this far away."""
    return max(3.0, math.sqrt(3.0 * max(distance - 10.0, 0.0)))


def _actor_velocity(actor: Actor) -> tuple[float, float]:
    return (actor.speed * math.cos(actor.pose.heading),
            actor.speed * math.sin(actor.pose.heading))


def is_dangerous(world: WorldState, actor: Actor) -> bool:
    """Constant-velocity projection crosses the ego's forward route corridor."""
    ego = world.ego
    ego_s = project_to_polyline(ego.route, ego.pose.xy)[0]
    horizon = max(4.0 * ego.speed, 15.0)
    corridor = ego.width + 0.5
    vx, vy = _actor_velocity(actor)
    t = 0.0
    while t <= DANGER_HORIZON_S + 1e-9:
        p = (actor.pose.x + vx * t, actor.pose.y + vy * t)
        s, offset, _ = project_to_polyline(ego.route, p)
        if abs(offset) <= corridor and ego_s - 2.0 <= s <= ego_s + horizon:
            return True
        t += 0.5
    return False


def rank_important_objects(world: WorldState) -> list[ImportanceRecord]:
    """Role actors first, dangerous actors next, then nearest-first."""
    from ..world.perception import planar_distance
    records = [
        ImportanceRecord(actor_id=a.id, is_role=a.is_role,
                         is_dangerous=is_dangerous(world, a),
                         distance=planar_distance(world, a))
        for a in relevant_actors(world)
    ]
    records.sort(key=lambda r: (not r.is_role, not r.is_dangerous,
                                r.distance, r.actor_id))
    return records


def _travel_corridor(world: WorldState) -> list:
    """The polyline the ego is actually driving along right now."""
    ego = world.ego
    if ego.current_lane is not None and ego.current_lane not in ego.route_lane_ids:
        return world.lane_graph.lane(ego.current_lane).centerline
    return ego.route


def _corridor_gap(world: WorldState, corridor, actor: Actor,
                  half_width: float) -> float | None:
    """Bumper gap to an actor inside the corridor, None when outside it."""
    s_a, off, _ = project_to_polyline(corridor, actor.pose.xy)
    if abs(off) > half_width:
        return None
    s_e = project_to_polyline(corridor, world.ego.pose.xy)[0]
    return s_a - s_e - (world.ego.length + actor.length) / 2.0


def _find_lead(world: WorldState) -> LeadNote | None:
    corridor = _travel_corridor(world)
    best: LeadNote | None = None
    for actor in world.actors:
        if actor.kind not in ("vehicle", "bicycle"):
            continue
        if is_oncoming(world, actor):
            continue
        gap = _corridor_gap(world, corridor, actor, half_width=1.9)
        if gap is None or gap < 0.0 or gap > LEAD_RANGE:
            continue
        headway = gap / max(world.ego.speed, 0.1)
        if best is None or gap < best.gap:
            best = LeadNote(actor_id=actor.id, gap=gap, headway=headway,
                            speed=actor.speed)
    return best


def _route_lane_at_ego(world: WorldState) -> Lane | None:
    ego = world.ego
    if ego.current_lane is not None and ego.current_lane in ego.route_lane_ids:
        return world.lane_graph.lane(ego.current_lane)
    best, best_off = None, math.inf
    for lid in dict.fromkeys(ego.route_lane_ids):
        lane = world.lane_graph.lane(lid)
        off = abs(project_to_polyline(lane.centerline, ego.pose.xy)[1])
        if off < best_off:
            best, best_off = lane, off
    return best


def _neighbor_is_legal(world: WorldState, lane: Lane, side: str) -> Lane | None:
    nid = lane.left_neighbor if side == "left" else lane.right_neighbor
    marking = lane.left_marking if side == "left" else lane.right_marking
    if nid is None or marking != "broken":
        return None
    neighbor = world.lane_graph.lane(nid)
    if neighbor.direction != lane.direction or neighbor.in_junction:
        return None
    return neighbor


def _lane_window_clear(world: WorldState, lane: Lane, s_lo: float, s_hi: float,
                       skip: set[str], stationary_only: bool = False) -> bool:
    for actor in world.actors:
        if actor.id in skip:
            continue
        if stationary_only and actor.speed > 0.1:
            continue
        s, off, _ = project_to_polyline(lane.centerline, actor.pose.xy)
        if abs(off) <= lane.width / 2.0 + 0.3 and s_lo <= s <= s_hi:
            return False
    return True


def _find_block(world: WorldState) -> BlockNote | None:
    """Stationary actor sitting on the route ahead, with an escape side if any."""
    ego = world.ego
    ego_s = project_to_polyline(ego.route, ego.pose.xy)[0]
    best: tuple[float, Actor] | None = None
    for actor in world.actors:
        if actor.speed > 0.1:
            continue
        gap = _corridor_gap(world, ego.route, actor, half_width=1.9)
        if gap is None or gap < -2.0 or gap > BLOCK_MAX_GAP:
            continue
        if best is None or gap < best[0]:
            best = (gap, actor)
    if best is None:
        return None
    gap, actor = best
    lane = _route_lane_at_ego(world)
    evade: str | None = None
    if lane is not None:
        s_block = project_to_polyline(lane.centerline, actor.pose.xy)[0]
        s_ego = project_to_polyline(lane.centerline, ego.pose.xy)[0]
        for side in ("left", "right"):
            neighbor = _neighbor_is_legal(world, lane, side)
            if neighbor is None:
                continue
            if _lane_window_clear(world, neighbor, s_ego - RETURN_BLOCK_BEHIND,
                                  s_block + RETURN_BLOCK_AHEAD, skip={actor.id}):
                evade = side
                break
    return BlockNote(actor_id=actor.id, gap=gap,
                     route_s=ego_s + gap + (ego.length + actor.length) / 2.0,
                     evade_side=evade)


def _find_invader(world: WorldState) -> InvadeNote | None:
    """Oncoming actor whose footprint intrudes into the ego route corridor."""
    lane = _route_lane_at_ego(world)
    half = lane.width / 2.0 if lane else 1.75
    best: InvadeNote | None = None
    for actor in world.actors:
        if actor.kind not in ("vehicle", "bicycle"):
            continue
        if not is_oncoming(world, actor):
            continue
        s_a, off, _ = project_to_polyline(world.ego.route, actor.pose.xy)
        # footprint edge, not centre: react as soon as the body intrudes
        if abs(off) - actor.width / 2.0 > half + 0.25:
            continue
        s_e = project_to_polyline(world.ego.route, world.ego.pose.xy)[0]
        dist = s_a - s_e
        if dist <= 0.0 or dist > INVADER_RANGE:
            continue
        side = "left" if off < 0 else "right"
        if best is None or dist < best.distance:
            best = InvadeNote(actor_id=actor.id, distance=dist, side=side)
    return best


def _control_notes(world: WorldState) -> list[ControlNote]:
    ego_s = project_to_polyline(world.ego.route, world.ego.pose.xy)[0]
    notes = []
    for ctl in world.controls:
        if not ctl.affects_ego:
            continue
        s_ctl = control_route_s(world, ctl)
        if s_ctl is None:
            continue
        d = s_ctl - ego_s
        if ctl.kind == "traffic-light":
            if ctl.state == "green":
                required, brake = "proceed while the light stays green", False
            else:
                required, brake = ("stop at the stop line and wait for green",
                                   True)
        elif ctl.kind == "stop-sign":
            required, brake = ("come to a complete stop at the sign before "
                               "continuing"), True
        elif ctl.kind == "speed-limit-sign":
            kmh = (ctl.value or 0.0) * 3.6
            required, brake = (f"keep the speed at or below {kmh:.0f} km/h "
                               "beyond the sign"), False
        else:
            required, brake = "slow down and proceed with caution", False
        notes.append(ControlNote(control_id=ctl.id, kind=ctl.kind,
                                 state=ctl.state, distance=d,
                                 required=required, demands_brake=brake))
    notes.sort(key=lambda n: (n.distance, n.control_id))
    return notes


def analyze(world: WorldState, ood: OODStatus | None = None) -> SceneAnalysis:
    ood = ood or classify_ood(world)
    ego_s = project_to_polyline(world.ego.route, world.ego.pose.xy)[0]
    limit = effective_speed_limit(world)
    target = min([x for x in (limit, world.meta.target_cruise) if x is not None],
                 default=world.meta.target_cruise)
    nxt = next_junction_on_route(world)
    junction_key = "FOLLOW_LANE"
    if nxt is not None:
        junction_key = COMMAND_TO_KEY[
            junction_maneuver(world, world.lane_graph.lane(nxt[0]))]
    ranking = rank_important_objects(world)
    return SceneAnalysis(
        ood=ood,
        route_s=ego_s,
        ranking=ranking,
        dangerous_ids={r.actor_id for r in ranking if r.is_dangerous},
        controls=_control_notes(world),
        lead=_find_lead(world),
        block=_find_block(world),
        invader=_find_invader(world),
        at_junction=at_or_entering_junction(world),
        junction_key=junction_key,
        speed_limit=limit,
        target_speed=target,
        in_tunnel=world.weather.in_tunnel,
    )


def _actor_name(world: WorldState, actor_id: str) -> str:
    try:
        actor = world.actor(actor_id)
    except KeyError:
        return f"object {actor_id}"
    return actor.name or f"the {actor.kind} {actor.id}"


def _pick_speed(world: WorldState, analysis: SceneAnalysis,
                allow_floor: float | None = None) -> tuple[str, str]:
    """(speed key, reason phrase) from the most restrictive applicable rule."""
    v = world.ego.speed
    candidates: list[tuple[int, str, str]] = []
    hold_reason: str | None = None

    for note in analysis.controls:
        if not note.demands_brake:
            continue
        label = ("the red traffic light" if note.kind == "traffic-light"
                 else "the stop sign")
        if note.distance < STOP_AT_DISTANCE:
            candidates.append((0, "STOP",
                               f"stop and wait at {label} just ahead"))
        elif note.distance < SLOW_FROM_DISTANCE:
            if v > _speed_allowance(note.distance):
                candidates.append((1, "DECELERATE",
                                   f"slow down while approaching {label} "
                                   f"{note.distance:.0f} m ahead"))
            hold_reason = hold_reason or (f"approach {label} without speeding up")

    lead = analysis.lead
    if lead is not None:
        name = _actor_name(world, lead.actor_id)
        if lead.headway < HEADWAY_STOP:
            candidates.append((0, "STOP",
                               f"stop because the gap to {name} has collapsed"))
        elif lead.headway < HEADWAY_SLOW:
            candidates.append((1, "DECELERATE",
                               f"slow down to keep a safe gap behind {name}"))
        elif lead.headway < HEADWAY_HOLD:
            hold_reason = hold_reason or f"hold speed while following {name}"

    block = analysis.block
    if block is not None and block.evade_side is None and analysis.ood.kind == "none":
        name = _actor_name(world, block.actor_id)
        if block.gap < STOP_AT_DISTANCE:
            candidates.append((0, "STOP", f"stop behind {name} blocking the lane"))
        elif block.gap < SLOW_FROM_DISTANCE and v > _speed_allowance(block.gap):
            candidates.append((1, "DECELERATE",
                               f"slow down behind {name} blocking the lane"))
        hold_reason = hold_reason or f"approach {name} carefully"

    if analysis.invader is not None:
        name = _actor_name(world, analysis.invader.actor_id)
        if v > INVADER_FLOOR:
            candidates.append((1, "DECELERATE",
                               f"slow down while {name} is invading the lane"))
        hold_reason = hold_reason or f"stay cautious while {name} clears the lane"

    if analysis.speed_limit is not None and v > analysis.speed_limit + OVER_LIMIT_SLACK:
        candidates.append((1, "DECELERATE", "come back under the speed limit"))

    if candidates:
        candidates.sort(key=lambda c: c[0])
        _, key, phrase = candidates[0]
        if allow_floor is not None and key == "DECELERATE" and v <= allow_floor:
            return "KEEP", phrase.replace("slow down", "keep a careful pace")
        return key, phrase

    if hold_reason is not None:
        return "KEEP", hold_reason
    if v < analysis.target_speed - UNDER_TARGET_SLACK:
        return "ACCELERATE", "the road ahead is clear, so speed up toward the target speed"
    return "KEEP", "the road ahead is clear, so hold the current speed"


def expert_decide(world: WorldState, ood: OODStatus | None = None,
                  analysis: SceneAnalysis | None = None) -> ExpertDecision:
    """Total rule cascade; see module docstring. Never raises on a valid world."""
    ood = ood or classify_ood(world)
    analysis = analysis or analyze(world, ood)
    v = world.ego.speed

    if ood.kind == "road-unrecoverable":
        return _mk("FOLLOW_LANE", "STOP",
                   "hold position off the road",
                   "stop and wait for assistance; no lane is within reach")

    if ood.kind == "road-recoverable":
        direction = "DEVIATE_LEFT" if ood.recovery_direction == "left" else "DEVIATE_RIGHT"
        if v > 6.0:
            speed, why = "DECELERATE", "slow down while steering back onto the road"
        elif v < 2.0:
            speed, why = "ACCELERATE", "roll forward to regain the road surface"
        else:
            speed, why = "KEEP", "keep a steady pace while regaining the road"
        return _mk(direction, speed,
                   f"steer {ood.recovery_direction} back onto the drivable road",
                   why)

    if ood.kind == "lane-orientation":
        if ood.deviation_angle > SEVERE_ANGLE:
            direction = "TURN_LEFT" if ood.recovery_direction == "left" else "TURN_RIGHT"
            phrase = f"make a controlled U-turn to the {ood.recovery_direction} to face the route forward"
            if v > 4.0:
                speed, why = "DECELERATE", "slow down for the tight turn"
            elif v < 1.5:
                speed, why = "ACCELERATE", "roll forward through the turn"
            else:
                speed, why = "KEEP", "keep a low steady speed through the turn"
        else:
            direction = "DEVIATE_LEFT" if ood.recovery_direction == "left" else "DEVIATE_RIGHT"
            phrase = f"steer {ood.recovery_direction} to realign with the lane direction"
            if v > POSTPONE_FLOOR:
                speed, why = "DECELERATE", "slow down while realigning with the lane"
            else:
                speed, why = "KEEP", "keep a steady pace while realigning"
        return _mk(direction, speed, phrase, why)

    if ood.kind == "lane-lateral":
        lane = _route_lane_at_ego(world)
        blocked = False
        if lane is not None:
            s_ego = project_to_polyline(lane.centerline, world.ego.pose.xy)[0]
            blocked = not _lane_window_clear(
                world, lane, s_ego - RETURN_BLOCK_BEHIND,
                s_ego + RETURN_BLOCK_AHEAD, skip=set())
            if not blocked:
                # A parked blocker further ahead still vetoes the return;
                # going back would only re-trigger the evasion around it.
                blocked = not _lane_window_clear(
                    world, lane, s_ego - RETURN_BLOCK_BEHIND,
                    s_ego + EVASION_DISTANCE, skip=set(), stationary_only=True)
        if blocked:
            speed, why = _pick_speed(world, analysis, allow_floor=POSTPONE_FLOOR)
            if speed in ("ACCELERATE",):
                speed, why = "KEEP", "hold speed until the route lane is clear"
            return _mk("FOLLOW_LANE", speed,
                       "stay in this lane for now; the route lane alongside is "
                       "still blocked", why)
        direction = ("CHANGE_LANE_RIGHT" if ood.recovery_direction == "right"
                     else "CHANGE_LANE_LEFT")
        speed, why = _pick_speed(world, analysis, allow_floor=POSTPONE_FLOOR)
        return _mk(direction, speed,
                   f"change lanes to the {ood.recovery_direction} to return to "
                   "the route lane", why)

    # junction-relaxed and nominal share the speed rules
    speed, why = _pick_speed(world, analysis)

    if ood.kind == "junction-relaxed" or analysis.at_junction:
        key = analysis.junction_key
        if key == "TURN_LEFT":
            phrase = "turn left at the junction, following the route"
        elif key == "TURN_RIGHT":
            phrase = "turn right at the junction, following the route"
        elif key == "GO_STRAIGHT":
            phrase = "go straight through the junction, following the route"
        else:
            key, phrase = "FOLLOW_LANE", "continue along the current lane"
        return _mk(key, speed, phrase, why)

    if analysis.invader is not None:
        away = "DEVIATE_RIGHT" if analysis.invader.side == "left" else "DEVIATE_LEFT"
        side = "right" if away == "DEVIATE_RIGHT" else "left"
        name = _actor_name(world, analysis.invader.actor_id)
        return _mk(away, speed,
                   f"shift to the {side} within the lane, away from {name}", why)

    block = analysis.block
    if block is not None and block.evade_side is not None and block.gap <= EVASION_DISTANCE:
        direction = ("CHANGE_LANE_LEFT" if block.evade_side == "left"
                     else "CHANGE_LANE_RIGHT")
        name = _actor_name(world, block.actor_id)
        return _mk(direction, speed,
                   f"change lanes to the {block.evade_side} to pass {name}", why)

    return _mk("FOLLOW_LANE", speed, "continue along the current lane", why)


def _mk(direction: str, speed: str, direction_phrase: str,
        speed_phrase: str) -> ExpertDecision:
    return ExpertDecision(direction=direction, speed=speed,
                          rationale=f"{direction_phrase}; {speed_phrase}",
                          direction_phrase=direction_phrase,
                          speed_phrase=speed_phrase)
