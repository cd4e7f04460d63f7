"""Shared observation helpers: relevance filtering, speed buckets, bearings."""
from __future__ import annotations

import math

from ..geometry import bearing_sector, wrap_angle
from .types import Actor, WorldState

MAX_PLANAR_DISTANCE = 50.0
MAX_VERTICAL_DISTANCE = 30.0
MIN_LIDAR_PROXY = 3


def planar_distance(world: WorldState, actor: Actor) -> float:
    e = world.ego.pose
    return math.hypot(actor.pose.x - e.x, actor.pose.y - e.y)


def vertical_distance(world: WorldState, actor: Actor) -> float:
    return 0.0  # the lane world is flat; kept for the filter contract


def is_relevant(world: WorldState, actor: Actor,
                max_planar: float = MAX_PLANAR_DISTANCE,
                max_vertical: float = MAX_VERTICAL_DISTANCE,
                min_proxy: int = MIN_LIDAR_PROXY) -> bool:
    if actor.lidar_point_proxy < min_proxy:
        return False
    if planar_distance(world, actor) > max_planar:
        return False
    if vertical_distance(world, actor) > max_vertical:
        return False
    return True


def relevant_actors(world: WorldState, kinds: tuple[str, ...] | None = None,
                    max_planar: float = MAX_PLANAR_DISTANCE,
                    max_vertical: float = MAX_VERTICAL_DISTANCE,
                    min_proxy: int = MIN_LIDAR_PROXY) -> list[Actor]:
    out = [
        a for a in world.actors
        if (kinds is None or a.kind in kinds)
        and is_relevant(world, a, max_planar, max_vertical, min_proxy)
    ]
    out.sort(key=lambda a: (planar_distance(world, a), a.id))
    return out


def speed_bucket(speed: float) -> str:
    """Rough speed classes: 0-0.1 stationary, 0.1-2 slow, 2-8 moderate, >8 fast."""
    if speed <= 0.1:
        return "stationary"
    if speed <= 2.0:
        return "slow"
    if speed <= 8.0:
        return "moderate"
    return "fast"


def position_sector(world: WorldState, actor: Actor) -> str:
    """8-way sector of the actor's position, in the ego frame."""
    e = world.ego.pose
    ang = math.atan2(actor.pose.y - e.y, actor.pose.x - e.x) - e.heading
    return bearing_sector(ang)


def motion_sector(world: WorldState, actor: Actor) -> str:
    """8-way sector of the actor's travel direction, in the ego frame."""
    return bearing_sector(wrap_angle(actor.pose.heading - world.ego.pose.heading))


def is_oncoming(world: WorldState, actor: Actor) -> bool:
    rel = wrap_angle(actor.pose.heading - world.ego.pose.heading)
    return math.cos(rel) < -0.5
