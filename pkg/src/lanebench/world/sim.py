"""Deterministic world stepping: ego kinematics, scripted traffic, light phases.

step() is a pure function: it deep-copies the incoming state and returns the
advanced copy. All motion is closed-form or piecewise linear, so identical
inputs always produce bit-identical states.
"""
from __future__ import annotations

import math

from ..geometry import (
    Vec,
    point_at_s,
    polyline_length,
    project_to_polyline,
    wrap_angle,
)
from .types import (
    Actor,
    ControlSignal,
    Lane,
    Pose,
    TrafficControl,
    WorldState,
    clamp_signal,
    copy_world,
    DT,
    MAX_ACCEL,
    MAX_BRAKE,
    MAX_STEER_ANGLE,
    NEAREST_WAYPOINT_RADIUS,
    WHEELBASE,
)

SPEED_CAP = 30.0              # hard physical cap, m/s
CONTROL_VISIBILITY = 40.0     # controls start affecting within this route distance
JUNCTION_ENTRY_DIST = 6.0     # "entering" threshold along the route
COMMAND_NOTICE_DIST = 40.0    # navigation command announced this far ahead
STOP_DWELL_WINDOW = 12.0      # stop-sign dwell must happen within this distance
STOP_DWELL_NEEDED = 1.0       # seconds at standstill to satisfy a stop sign
STANDSTILL_SPEED = 0.1


def step(world: WorldState, ego_control: ControlSignal, dt: float = DT) -> WorldState:
    w = copy_world(world)
    sig = clamp_signal(ego_control)

    # ego: kinematic bicycle, steer left-negative
    ego = w.ego
    v = ego.speed
    delta = -sig.steer * MAX_STEER_ANGLE
    x = ego.pose.x + v * math.cos(ego.pose.heading) * dt
    y = ego.pose.y + v * math.sin(ego.pose.heading) * dt
    heading = wrap_angle(ego.pose.heading + v / WHEELBASE * math.tan(delta) * dt)
    accel = sig.throttle * MAX_ACCEL - sig.brake * MAX_BRAKE
    ego.pose = Pose(x, y, heading)
    ego.speed = min(SPEED_CAP, max(0.0, v + accel * dt))

    for actor in w.actors:
        _advance_actor(actor, dt, w.time_s + dt)

    for ctl in w.controls:
        if ctl.kind == "traffic-light" and ctl.phases:
            _advance_light(ctl, dt)

    w.frame_index += 1
    refresh_derived(w, dt)
    return w


def _advance_actor(actor: Actor, dt: float, now: float) -> None:
    m = actor.motion
    if m.kind == "lane-follow" and m.path:
        m.s += m.speed * dt
        actor.speed = m.speed
        pos, heading = _path_pose(m.path, m.s)
        off = _profile_offset(m.offset_profile, m.s)
        if off:
            pos = (pos[0] + off * math.sin(heading), pos[1] - off * math.cos(heading))
        actor.pose = Pose(pos[0], pos[1], heading)
    elif m.kind == "scripted" and m.schedule:
        pos = _schedule_pos(m.schedule, now)
        prev = _schedule_pos(m.schedule, now - dt)
        dx, dy = pos[0] - prev[0], pos[1] - prev[1]
        moved = math.hypot(dx, dy)
        heading = math.atan2(dy, dx) if moved > 1e-9 else actor.pose.heading
        actor.speed = moved / dt
        actor.pose = Pose(pos[0], pos[1], heading)


def _path_pose(path: list[Vec], s: float) -> tuple[Vec, float]:
    total = polyline_length(path)
    if s <= total:
        return point_at_s(path, s)
    end, heading = point_at_s(path, total)  # extrapolate along the final tangent
    extra = s - total
    return (end[0] + extra * math.cos(heading), end[1] + extra * math.sin(heading)), heading


def _profile_offset(profile: list[tuple[float, float]], s: float) -> float:
    if not profile:
        return 0.0
    if s <= profile[0][0]:
        return profile[0][1]
    for (s0, o0), (s1, o1) in zip(profile, profile[1:]):
        if s <= s1:
            t = 0.0 if s1 <= s0 else (s - s0) / (s1 - s0)
            return o0 + t * (o1 - o0)
    return profile[-1][1]


def _schedule_pos(schedule: list[tuple[float, float, float]], t: float) -> Vec:
    if t <= schedule[0][0]:
        return (schedule[0][1], schedule[0][2])
    for (t0, x0, y0), (t1, x1, y1) in zip(schedule, schedule[1:]):
        if t <= t1:
            k = 0.0 if t1 <= t0 else (t - t0) / (t1 - t0)
            return (x0 + k * (x1 - x0), y0 + k * (y1 - y0))
    return (schedule[-1][1], schedule[-1][2])


def _advance_light(ctl: TrafficControl, dt: float) -> None:
    states = [s for s, _ in ctl.phases]
    idx = states.index(ctl.state) if ctl.state in states else 0
    ctl.phase_elapsed += dt
    while ctl.phase_elapsed >= ctl.phases[idx][1] - 1e-9:
        ctl.phase_elapsed -= ctl.phases[idx][1]
        idx = (idx + 1) % len(ctl.phases)
    ctl.state = ctl.phases[idx][0]


# ---------- derived per-frame state ----------

def nearest_waypoint(world: WorldState, position: Vec,
                     radius: float = NEAREST_WAYPOINT_RADIUS
                     ) -> tuple[str, Vec, float] | None:
    """Closest lane-centerline point within radius: (lane_id, point, offset).

    Offset is signed, negative to the left of the lane direction. Ties resolve
    to the lexicographically smallest lane id.
    """
    best: tuple[str, Vec, float] | None = None
    best_key = (math.inf, "")
    for lane_id in sorted(world.lane_graph.lanes):
        lane = world.lane_graph.lanes[lane_id]
        _, offset, proj = project_to_polyline(lane.centerline, position)
        key = (abs(offset), lane_id)
        if key < best_key:
            best_key = key
            best = (lane_id, proj, offset)
    if best is None or best_key[0] > radius:
        return None
    return best


def route_progress(world: WorldState, position: Vec | None = None) -> float:
    pos = position if position is not None else world.ego.pose.xy
    s, _, _ = project_to_polyline(world.ego.route, pos)
    return s


def route_length(world: WorldState) -> float:
    return polyline_length(world.ego.route)


def control_route_s(world: WorldState, ctl: TrafficControl) -> float | None:
    """Arclength of a control's stop point along the ego route, if on it."""
    if ctl.lane_id is None or ctl.lane_id not in world.ego.route_lane_ids:
        return None
    lane = world.lane_graph.lane(ctl.lane_id)
    anchor = point_at_s(lane.centerline, ctl.s_on_lane)[0]
    s, offset, _ = project_to_polyline(world.ego.route, anchor)
    if abs(offset) > lane.width:  # same lane id but geometrically elsewhere
        return None
    return s


def junction_maneuver(world: WorldState, lane: Lane) -> str:
    """go-straight / turn-left / turn-right from connector geometry."""
    pts = lane.centerline
    h0 = point_at_s(pts, 0.0)[1]
    h1 = point_at_s(pts, polyline_length(pts))[1]
    turn = wrap_angle(h1 - h0)
    if turn > math.radians(30):
        return "turn-left"
    if turn < -math.radians(30):
        return "turn-right"
    return "go-straight"


def next_junction_on_route(world: WorldState) -> tuple[str, float] | None:
    """(junction lane id, route distance to its start) ahead of ego, if any."""
    ego_s = route_progress(world)
    seen: set[str] = set()
    acc: dict[str, float] = {}
    # first route point index per lane gives the lane's entry arclength
    from ..geometry import cumulative_lengths
    lengths = cumulative_lengths(world.ego.route)
    for idx, lid in enumerate(world.ego.route_lane_ids):
        if lid not in seen:
            seen.add(lid)
            acc[lid] = lengths[idx]
    for lid in world.ego.route_lane_ids:
        lane = world.lane_graph.lane(lid)
        if lane.in_junction:
            entry = acc[lid]
            lane_len = polyline_length(lane.centerline)
            if entry + lane_len >= ego_s:  # not fully passed yet
                return lid, entry - ego_s
    return None


def at_or_entering_junction(world: WorldState) -> bool:
    cur = world.ego.current_lane
    if cur is not None and world.lane_graph.lane(cur).in_junction:
        return True
    nxt = next_junction_on_route(world)
    return nxt is not None and nxt[1] <= JUNCTION_ENTRY_DIST


def effective_speed_limit(world: WorldState) -> float | None:
    if world.ego.remembered_speed_limit is not None:
        return world.ego.remembered_speed_limit
    if world.ego.current_lane is not None:
        return world.lane_graph.lane(world.ego.current_lane).speed_limit
    return None


def refresh_derived(world: WorldState, dt: float = DT) -> None:
    """Recompute ego lane attachment, navigation command, control effects."""
    ego = world.ego
    near = nearest_waypoint(world, ego.pose.xy)
    if near is None:
        ego.current_lane = None
        ego.lateral_offset = None
    else:
        ego.current_lane = near[0]
        ego.lateral_offset = near[2]

    ego_s = route_progress(world)

    nxt = next_junction_on_route(world)
    if nxt is not None and nxt[1] <= COMMAND_NOTICE_DIST:
        ego.command = junction_maneuver(world, world.lane_graph.lane(nxt[0]))
    else:
        ego.command = "follow-lane"

    for ctl in world.controls:
        s_ctl = control_route_s(world, ctl)
        if s_ctl is None:
            ctl.affects_ego = False
            continue
        ahead = s_ctl - ego_s
        if not ctl.crossed and ahead < -1.0:
            ctl.crossed = True
            if ctl.kind == "speed-limit-sign" and ctl.value is not None:
                ego.remembered_speed_limit = ctl.value
        if ctl.kind == "stop-sign" and not ctl.satisfied and not ctl.crossed:
            if -1.0 <= ahead <= STOP_DWELL_WINDOW and ego.speed < STANDSTILL_SPEED:
                ctl.dwell_s += dt
                if ctl.dwell_s >= STOP_DWELL_NEEDED - 1e-9:
                    ctl.satisfied = True
        if ctl.crossed:
            ctl.affects_ego = False
        elif ctl.kind == "stop-sign" and ctl.satisfied:
            ctl.affects_ego = False
        else:
            ctl.affects_ego = -1.0 <= ahead <= CONTROL_VISIBILITY

    world.weather.in_tunnel = _in_tunnel(world)


def _in_tunnel(world: WorldState) -> bool:
    if not world.meta.tunnel_zones:
        return world.weather.in_tunnel
    ego = world.ego
    for zone in world.meta.tunnel_zones:
        lane = world.lane_graph.lanes.get(zone.lane_id)
        if lane is None:
            continue
        s, offset, _ = project_to_polyline(lane.centerline, ego.pose.xy)
        if zone.s0 <= s <= zone.s1 and abs(offset) <= lane.width:
            return True
    return False
