"""Plain-language scene rendering, the textual twin of the BEV raster."""
from __future__ import annotations

from . import perception as pc
from .sim import control_route_s, effective_speed_limit, route_progress
from .types import WorldState

FOCUS_KINDS = ("vehicle", "bicycle", "pedestrian")


def render_text(world: WorldState,
                max_planar: float = pc.MAX_PLANAR_DISTANCE,
                max_vertical: float = pc.MAX_VERTICAL_DISTANCE,
                min_proxy: int = pc.MIN_LIDAR_PROXY) -> str:
    lines: list[str] = []
    ego = world.ego
    lane_bit = f"in lane {ego.current_lane}" if ego.current_lane else "off any mapped lane"
    lines.append(
        f"The ego vehicle is driving at {ego.speed:.1f} m/s {lane_bit}; "
        f"navigation command: {ego.command}.")
    limit = effective_speed_limit(world)
    if limit is not None:
        lines.append(f"The speed limit in effect is {limit * 3.6:.0f} km/h.")
    else:
        lines.append("No speed limit is currently posted.")
    if world.weather.in_tunnel:
        lines.append("The ego vehicle is currently inside a tunnel.")
    else:
        cond = {"clear": "clear", "rain": "raining", "fog": "foggy",
                "flooded": "flooded"}[world.weather.condition]
        lines.append(f"It is {world.weather.time_of_day} and the weather is {cond}.")

    ego_s = route_progress(world)
    for ctl in world.controls:
        if not ctl.affects_ego:
            continue
        s_ctl = control_route_s(world, ctl)
        ahead = (s_ctl - ego_s) if s_ctl is not None else 0.0
        if ctl.kind == "traffic-light":
            lines.append(f"A {ctl.state} traffic light (id: {ctl.id}) is "
                         f"{ahead:.1f} m ahead on the route.")
        elif ctl.kind == "speed-limit-sign":
            lines.append(f"A {(ctl.value or 0) * 3.6:.0f} km/h speed-limit sign "
                         f"(id: {ctl.id}) is {ahead:.1f} m ahead.")
        else:
            kind = ctl.kind.replace("-", " ")
            lines.append(f"A {kind} (id: {ctl.id}) is {ahead:.1f} m ahead.")

    for actor in pc.relevant_actors(world, FOCUS_KINDS, max_planar, max_vertical, min_proxy):
        d = pc.planar_distance(world, actor)
        where = pc.position_sector(world, actor)
        if actor.speed <= 0.1:
            motion = "currently stationary"
        else:
            motion = (f"moving at a {pc.speed_bucket(actor.speed)} speed "
                      f"({actor.speed:.1f} m/s) toward the ego's "
                      f"{pc.motion_sector(world, actor)}")
        name = actor.name or f"a {actor.kind}"
        lines.append(f"{name.capitalize()} (id: {actor.id}), a {actor.kind}, is "
                     f"{d:.1f} m to the {where}, {motion}.")
    return "\n".join(lines)
