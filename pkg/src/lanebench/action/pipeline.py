"""Waypoint planning from action keys, and the low-level controllers.

Planning happens once per intervention; between interventions the waypoint
list is frozen and only the speed key is re-applied against the current speed
(so ACCELERATE keeps pushing toward the limit and STOP keeps the target at 0).
Lateral control is pure pursuit; longitudinal control is proportional with a
small deadband. Steering is negative to the left throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from ..geometry import (Vec, blend_to_path, offset_polyline, point_at_s,
                        polyline_length, project_to_polyline, slice_by_s)
from ..world import WorldState, effective_speed_limit
from ..world.types import (ControlSignal, DT, EgoState, Lane, MAX_STEER_ANGLE,
                           WHEELBASE, clamp_signal)
from .keys import ActionKeys, resolve_defaults

LOOKAHEAD = 6.0
BLEND_LENGTH = 15.0       # lane changes merge over this distance
DEVIATE_BLEND = 10.0
DEVIATE_OFFSET = 0.8
SPEED_STEP = 2.0          # m/s added or removed by ACCELERATE / DECELERATE
PLAN_HORIZON = 45.0
PLAN_SPACING = 1.0
THROTTLE_GAIN = 0.5       # throttle fraction per m/s of speed error
BRAKE_GAIN = 0.25
DEADBAND = 0.02           # m/s; inside it neither pedal is touched
THROTTLE_SLEW = 0.12      # max rise per tick; releases are instant
BRAKE_SLEW = 0.08
STEER_SLEW = 0.25


@dataclass
class WaypointPlan:
    waypoints: list[Vec]
    target_speed: float
    direction: str
    warning: str | None = None


def apply_speed_key(key: str, current: float, limit: float | None) -> float:
    if key == "STOP":
        return 0.0
    if key == "DECELERATE":
        return max(current - SPEED_STEP, 0.0)
    if key == "ACCELERATE":
        target = current + SPEED_STEP
        return min(target, limit) if limit is not None else target
    return current  # KEEP


def _chained_centerline(world: WorldState, lane: Lane, need: float) -> list[Vec]:
    """Lane centerline extended through first successors until `need` meters."""
    pts = list(lane.centerline)
    seen = {lane.id}
    current = lane
    while polyline_length(pts) < need and current.successors:
        nxt = world.lane_graph.lane(current.successors[0])
        if nxt.id in seen:
            break
        seen.add(nxt.id)
        pts.extend(nxt.centerline[1:])
        current = nxt
    return pts


def _anchor_lane(world: WorldState) -> Lane | None:
    ego = world.ego
    if ego.current_lane is not None:
        return world.lane_graph.lane(ego.current_lane)
    if ego.route_lane_ids:
        return world.lane_graph.lane(ego.route_lane_ids[0])
    return None


def _route_ahead(world: WorldState) -> list[Vec]:
    s = project_to_polyline(world.ego.route, world.ego.pose.xy)[0]
    return slice_by_s(world.ego.route, s, s + PLAN_HORIZON, PLAN_SPACING)


def plan_waypoints(keys: ActionKeys, world: WorldState) -> WaypointPlan:
    """Turn resolved keys into a drivable polyline plus a target speed."""
    ego = world.ego
    direction = keys.direction or "FOLLOW_LANE"
    speed_key = keys.speed or "KEEP"
    target_speed = apply_speed_key(speed_key, ego.speed,
                                   effective_speed_limit(world))
    warning: str | None = None

    if direction in ("CHANGE_LANE_LEFT", "CHANGE_LANE_RIGHT"):
        lane = _anchor_lane(world)
        side_id = None
        if lane is not None:
            side_id = (lane.left_neighbor if direction == "CHANGE_LANE_LEFT"
                       else lane.right_neighbor)
        if side_id is None:
            warning = f"{direction} has no neighbor lane here; following the lane instead"
            direction = "FOLLOW_LANE"
        else:
            neighbor = world.lane_graph.lane(side_id)
            s_here = project_to_polyline(neighbor.centerline, ego.pose.xy)[0]
            path = _chained_centerline(world, neighbor, s_here + PLAN_HORIZON)
            pts = blend_to_path(ego.pose.xy, path, BLEND_LENGTH, PLAN_HORIZON,
                                PLAN_SPACING)
            return WaypointPlan(pts, target_speed, direction)

    if direction in ("DEVIATE_LEFT", "DEVIATE_RIGHT"):
        sign = 1.0 if direction == "DEVIATE_RIGHT" else -1.0
        shifted = offset_polyline(ego.route, sign * DEVIATE_OFFSET)
        pts = blend_to_path(ego.pose.xy, shifted, DEVIATE_BLEND, PLAN_HORIZON,
                            PLAN_SPACING)
        return WaypointPlan(pts, target_speed, direction)

    if direction in ("GO_STRAIGHT", "TURN_LEFT", "TURN_RIGHT"):
        # the junction connector is part of the route polyline already
        return WaypointPlan(_route_ahead(world), target_speed, direction)

    # FOLLOW_LANE: the route when we are on it, the lane under us otherwise
    lane = _anchor_lane(world)
    if lane is not None and lane.id not in ego.route_lane_ids:
        s_here = project_to_polyline(lane.centerline, ego.pose.xy)[0]
        path = _chained_centerline(world, lane, s_here + PLAN_HORIZON)
        pts = slice_by_s(path, s_here, s_here + PLAN_HORIZON, PLAN_SPACING)
        return WaypointPlan(pts, target_speed, "FOLLOW_LANE", warning)
    return WaypointPlan(_route_ahead(world), target_speed, "FOLLOW_LANE", warning)


def hold_between_interventions(last_keys: ActionKeys, world: WorldState,
                               last_plan: WaypointPlan) -> WaypointPlan:
    """Frozen waypoints; the speed key is re-applied to the current speed."""
    target = apply_speed_key(last_keys.speed or "KEEP", world.ego.speed,
                             effective_speed_limit(world))
    return replace(last_plan, target_speed=target)


def control(plan: WaypointPlan, ego: EgoState, dt: float = DT) -> ControlSignal:
    """Pure pursuit + proportional speed control. Left steering is negative."""
    steer = 0.0
    if len(plan.waypoints) >= 2:
        s_here = project_to_polyline(plan.waypoints, ego.pose.xy)[0]
        target = point_at_s(plan.waypoints, s_here + LOOKAHEAD)[0]
        dx = target[0] - ego.pose.x
        dy = target[1] - ego.pose.y
        cos_h, sin_h = math.cos(ego.pose.heading), math.sin(ego.pose.heading)
        fwd = dx * cos_h + dy * sin_h
        left = -dx * sin_h + dy * cos_h
        ld = math.hypot(fwd, left)
        if ld > 1e-6:
            if fwd < 0.0 and abs(left) < 0.5:
                # target almost directly behind: commit to a full turn,
                # deterministically to the left when exactly astern
                steer = 1.0 if left < 0.0 else -1.0
            else:
                curvature = 2.0 * left / (ld * ld)
                delta = math.atan(curvature * WHEELBASE)
                steer = -delta / MAX_STEER_ANGLE

    error = plan.target_speed - ego.speed
    throttle = brake = 0.0
    if error > DEADBAND:
        throttle = error * THROTTLE_GAIN
    elif error < -DEADBAND:
        brake = -error * BRAKE_GAIN
    return clamp_signal(ControlSignal(steer=steer, throttle=throttle, brake=brake))


class ActionPipeline:
    """Per-episode controller state: current plan, keys, and slew limiting."""

    def __init__(self) -> None:
        self.last_keys: ActionKeys | None = None
        self.last_plan: WaypointPlan | None = None
        self.warnings: list[str] = []
        self._prev = ControlSignal(0.0, 0.0, 0.0)

    def on_intervention(self, keys: ActionKeys, world: WorldState) -> WaypointPlan:
        resolved = resolve_defaults(keys, world)
        plan = plan_waypoints(resolved, world)
        if plan.warning:
            self.warnings.append(f"frame {world.frame_index}: {plan.warning}")
        self.last_keys = resolved
        self.last_plan = plan
        return plan

    def tick(self, world: WorldState, dt: float = DT) -> ControlSignal:
        if self.last_plan is None or self.last_keys is None:
            self.on_intervention(ActionKeys(), world)
        assert self.last_plan is not None and self.last_keys is not None
        plan = hold_between_interventions(self.last_keys, world, self.last_plan)
        self.last_plan = plan
        raw = control(plan, world.ego, dt)
        smoothed = self._slew(raw)
        self._prev = smoothed
        return smoothed

    def _slew(self, raw: ControlSignal) -> ControlSignal:
        prev = self._prev
        steer = prev.steer + max(-STEER_SLEW, min(STEER_SLEW, raw.steer - prev.steer))
        # pedal rises are rate-limited; releases and handovers are immediate
        throttle, brake = raw.throttle, raw.brake
        if throttle > 0.0:
            throttle = min(throttle, prev.throttle + THROTTLE_SLEW)
            brake = 0.0
        elif brake > 0.0:
            brake = min(brake, prev.brake + BRAKE_SLEW)
            throttle = 0.0
        return clamp_signal(ControlSignal(steer=steer, throttle=throttle,
                                          brake=brake))
