"""Action-key vocabulary, free-text extraction and default resolution."""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..world.sim import at_or_entering_junction, next_junction_on_route, junction_maneuver
from ..world.types import WorldState

DIRECTION_KEYS = ("FOLLOW_LANE", "CHANGE_LANE_LEFT", "CHANGE_LANE_RIGHT", "GO_STRAIGHT",
                  "TURN_LEFT", "TURN_RIGHT", "DEVIATE_LEFT", "DEVIATE_RIGHT")
SPEED_KEYS = ("KEEP", "ACCELERATE", "DECELERATE", "STOP")

JUNCTION_ONLY = ("GO_STRAIGHT", "TURN_LEFT", "TURN_RIGHT")

COMMAND_TO_KEY = {"go-straight": "GO_STRAIGHT", "turn-left": "TURN_LEFT",
                  "turn-right": "TURN_RIGHT", "follow-lane": "FOLLOW_LANE"}


@dataclass(frozen=True)
class ActionKeys:
    direction: str | None = None
    speed: str | None = None


def _pattern(tokens: tuple[str, ...]) -> re.Pattern:
    # longest alternatives first so overlapping spellings cannot shadow each other
    alts = sorted(tokens, key=len, reverse=True)
    return re.compile(r"\b(?:" + "|".join(re.escape(t) for t in alts) + r")\b",
                      re.IGNORECASE)

_DIRECTION_RE = _pattern(DIRECTION_KEYS)
_SPEED_RE = _pattern(SPEED_KEYS)


def extract_keys(text: str) -> ActionKeys:
    """Scan free text for vocabulary tokens; the LAST occurrence per class wins.

    Matching is case-insensitive on word boundaries; spelling variants with
    hyphens or spaces (e.g. "change lane left") are intentionally not matched.
    """
    direction = None
    for m in _DIRECTION_RE.finditer(text):
        direction = m.group(0).upper()
    speed = None
    for m in _SPEED_RE.finditer(text):
        speed = m.group(0).upper()
    return ActionKeys(direction=direction, speed=speed)


def resolve_defaults(keys: ActionKeys, world: WorldState) -> ActionKeys:
    """Fill missing keys: continue the route (junction command aware), hold speed."""
    direction = keys.direction
    if direction is None:
        if at_or_entering_junction(world):
            nxt = next_junction_on_route(world)
            if nxt is not None:
                maneuver = junction_maneuver(world, world.lane_graph.lane(nxt[0]))
                direction = COMMAND_TO_KEY[maneuver]
            else:
                direction = COMMAND_TO_KEY.get(world.ego.command, "FOLLOW_LANE")
        else:
            direction = "FOLLOW_LANE"
    speed = keys.speed if keys.speed is not None else "KEEP"
    return ActionKeys(direction=direction, speed=speed)
