"""Action vocabulary and the controller that turns key pairs into controls."""
from .keys import (COMMAND_TO_KEY, DIRECTION_KEYS, JUNCTION_ONLY, SPEED_KEYS,
                   ActionKeys, extract_keys, resolve_defaults)
from .pipeline import (ActionPipeline, WaypointPlan, apply_speed_key, control,
                       hold_between_interventions, plan_waypoints)

__all__ = [
    "COMMAND_TO_KEY", "DIRECTION_KEYS", "JUNCTION_ONLY", "SPEED_KEYS",
    "ActionKeys", "ActionPipeline", "WaypointPlan", "apply_speed_key",
    "control", "extract_keys", "hold_between_interventions", "plan_waypoints",
    "resolve_defaults",
]
