"""2D lane-world simulator: types, scenario loading, stepping, rendering."""
from .types import (
    Actor,
    ControlSignal,
    EgoState,
    Junction,
    Lane,
    LaneGraph,
    MotionScript,
    Pose,
    ScenarioMeta,
    TrafficControl,
    TunnelZone,
    WeatherState,
    WorldState,
    clamp_signal,
    copy_world,
    footprint,
    world_from_dict,
    world_to_dict,
    DT,
)
from .scenario import ScenarioError, builtin_scenario_names, load_scenario
from .sim import (
    at_or_entering_junction,
    control_route_s,
    effective_speed_limit,
    junction_maneuver,
    nearest_waypoint,
    next_junction_on_route,
    refresh_derived,
    route_length,
    route_progress,
    step,
)
from .bev import RenderOptions, render_bev, render_bev_png
from .text import render_text

__all__ = [
    "Actor", "ControlSignal", "EgoState", "Junction", "Lane", "LaneGraph",
    "MotionScript", "Pose", "ScenarioMeta", "TrafficControl", "TunnelZone",
    "WeatherState", "WorldState", "clamp_signal", "copy_world", "footprint",
    "world_from_dict", "world_to_dict",
    "DT", "ScenarioError", "builtin_scenario_names", "load_scenario",
    "at_or_entering_junction", "control_route_s", "effective_speed_limit",
    "junction_maneuver", "nearest_waypoint", "next_junction_on_route",
    "refresh_derived", "route_length", "route_progress", "step",
    "RenderOptions", "render_bev", "render_bev_png", "render_text",
]
