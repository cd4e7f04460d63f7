"""Out-of-distribution state classification for the rule-based expert."""
from __future__ import annotations

import math
from dataclasses import dataclass

from ..geometry import point_at_s, project_to_polyline, wrap_angle
from ..world import WorldState, at_or_entering_junction, nearest_waypoint
from ..world.types import NEAREST_WAYPOINT_RADIUS

OOD_KINDS = ("none", "road-unrecoverable", "road-recoverable", "junction-relaxed",
             "lane-orientation", "lane-lateral")

MILD_ANGLE = math.radians(20.0)     # below: controller noise, not OOD
SEVERE_ANGLE = math.radians(100.0)  # above: a U-turn is needed
OFF_SURFACE_MARGIN = 0.05


@dataclass(frozen=True)
class OODStatus:
    kind: str
    deviation_angle: float = 0.0    # |heading error| vs the target direction, rad
    lateral_error: float = 0.0      # distance to the target lane centerline, m
    recovery_direction: str = "none"  # left | right | none


def _route_frame(world: WorldState) -> tuple[float, float, float]:
    """(arclength, signed offset, route heading) of ego vs its route."""
    s, offset, _ = project_to_polyline(world.ego.route, world.ego.pose.xy)
    heading = point_at_s(world.ego.route, s)[1]
    return s, offset, heading


def classify_ood(world: WorldState) -> OODStatus:
    """Exactly one kind, by precedence:
    road-unrecoverable > road-recoverable > junction-relaxed >
    lane-orientation > lane-lateral > none.
    """
    ego = world.ego
    _, route_offset, route_heading = _route_frame(world)

    near = nearest_waypoint(world, ego.pose.xy)
    if near is None:
        return OODStatus(kind="road-unrecoverable",
                         deviation_angle=abs(wrap_angle(ego.pose.heading - route_heading)),
                         lateral_error=abs(route_offset),
                         recovery_direction="none")

    lane_id, _, lane_offset = near
    lane = world.lane_graph.lane(lane_id)
    if abs(lane_offset) > lane.width / 2.0 + OFF_SURFACE_MARGIN:
        # off the drivable surface but a lane is in reach: steer back onto it
        return OODStatus(kind="road-recoverable",
                         deviation_angle=abs(wrap_angle(ego.pose.heading - route_heading)),
                         lateral_error=abs(lane_offset),
                         recovery_direction="right" if lane_offset < 0 else "left")

    if at_or_entering_junction(world):
        return OODStatus(kind="junction-relaxed",
                         deviation_angle=abs(wrap_angle(ego.pose.heading - route_heading)),
                         lateral_error=abs(route_offset),
                         recovery_direction="none")

    # orientation against the route when near it, else against the lane under us
    if abs(route_offset) <= NEAREST_WAYPOINT_RADIUS:
        target_heading = route_heading
    else:
        lane_s, _, _ = project_to_polyline(lane.centerline, ego.pose.xy)
        target_heading = point_at_s(lane.centerline, lane_s)[1]
    err = wrap_angle(target_heading - ego.pose.heading)
    if abs(err) >= MILD_ANGLE:
        return OODStatus(kind="lane-orientation",
                         deviation_angle=abs(err),
                         lateral_error=abs(route_offset),
                         recovery_direction="left" if err > 0 else "right")

    if lane_id not in ego.route_lane_ids:
        return OODStatus(kind="lane-lateral",
                         deviation_angle=abs(err),
                         lateral_error=abs(route_offset),
                         recovery_direction="right" if route_offset < 0 else "left")

    return OODStatus(kind="none",
                     deviation_angle=abs(err),
                     lateral_error=abs(route_offset),
                     recovery_direction="none")
