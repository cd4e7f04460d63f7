"""Domain types for the 2D lane world."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

from ..geometry import Vec

DT = 0.1                 # simulation tick, seconds
EGO_LENGTH = 4.5
EGO_WIDTH = 2.0
WHEELBASE = 2.9
MAX_STEER_ANGLE = 0.6109  # rad (35 deg) at |steer| == 1
MAX_ACCEL = 3.0           # m/s^2 at throttle 1
MAX_BRAKE = 6.0           # m/s^2 at brake 1
NEAREST_WAYPOINT_RADIUS = 8.0

ACTOR_KINDS = ("vehicle", "bicycle", "pedestrian", "static-obstacle")
CONTROL_KINDS = ("traffic-light", "stop-sign", "speed-limit-sign",
                 "yield-sign", "construction-warning", "construction-cone")
LIGHT_STATES = ("red", "green", "yellow")


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    heading: float

    @property
    def xy(self) -> Vec:
        return (self.x, self.y)


def footprint(pose: Pose, length: float, width: float) -> list[Vec]:
    """Axis-aligned-in-body-frame rectangle corners, counter-clockwise."""
    ch, sh = math.cos(pose.heading), math.sin(pose.heading)
    hl, hw = length / 2.0, width / 2.0
    corners = []
    for dx, dy in ((hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)):
        corners.append((pose.x + dx * ch - dy * sh, pose.y + dx * sh + dy * ch))
    return corners


@dataclass
class Lane:
    id: str
    centerline: list[Vec]
    width: float
    direction: str = "same"          # same | opposite (relative to the road reference)
    left_neighbor: str | None = None
    right_neighbor: str | None = None
    left_marking: str = "solid"      # solid | broken | none
    right_marking: str = "solid"
    speed_limit: float | None = None  # m/s
    in_junction: bool = False
    successors: list[str] = field(default_factory=list)


@dataclass
class Junction:
    id: str
    lane_ids: list[str]


@dataclass
class LaneGraph:
    lanes: dict[str, Lane]
    junctions: list[Junction] = field(default_factory=list)

    def lane(self, lane_id: str) -> Lane:
        return self.lanes[lane_id]


@dataclass
class MotionScript:
    """How a background actor moves. Deterministic, no controller involved."""
    kind: str = "static"              # static | lane-follow | scripted
    path: list[Vec] = field(default_factory=list)
    s: float = 0.0                    # progress along path (lane-follow)
    speed: float = 0.0
    # piecewise-linear lateral offset over path arclength, left-negative
    offset_profile: list[tuple[float, float]] = field(default_factory=list)
    # scripted: absolute (t, x, y) knots, linearly interpolated
    schedule: list[tuple[float, float, float]] = field(default_factory=list)


@dataclass
class Actor:
    id: str
    kind: str
    pose: Pose
    speed: float = 0.0
    length: float = 4.5
    width: float = 2.0
    name: str = ""
    color: str = ""
    is_role: bool = False
    lidar_point_proxy: int = 50
    motion: MotionScript = field(default_factory=MotionScript)

    @property
    def bbox(self) -> tuple[float, float]:
        return (self.length, self.width)


@dataclass
class TrafficControl:
    id: str
    kind: str
    pose: Pose
    lane_id: str | None = None
    s_on_lane: float = 0.0
    state: str | None = None          # red | yellow | green, lights only
    value: float | None = None        # m/s, speed-limit signs only
    affects_ego: bool = False
    # runtime bookkeeping (serialized so snapshots replay identically)
    phases: list[tuple[str, float]] = field(default_factory=list)
    phase_elapsed: float = 0.0
    satisfied: bool = False           # stop sign fully served
    dwell_s: float = 0.0
    crossed: bool = False


@dataclass
class WeatherState:
    time_of_day: str = "day"          # day | night
    condition: str = "clear"          # clear | rain | fog | flooded
    in_tunnel: bool = False


@dataclass
class EgoState:
    pose: Pose
    speed: float
    route: list[Vec]
    route_lane_ids: list[str]
    current_lane: str | None = None
    lateral_offset: float | None = None   # left negative, vs current lane
    command: str = "follow-lane"          # follow-lane | go-straight | turn-left | turn-right
    remembered_speed_limit: float | None = None
    length: float = EGO_LENGTH
    width: float = EGO_WIDTH


@dataclass
class TunnelZone:
    lane_id: str
    s0: float
    s1: float


@dataclass
class ScenarioMeta:
    name: str
    version: int = 1
    seed: int = 0
    tick_budget: int = 600
    target_cruise: float = 8.33       # m/s fallback when no limit posted
    roles: dict[str, str] = field(default_factory=dict)
    tunnel_zones: list[TunnelZone] = field(default_factory=list)


@dataclass
class WorldState:
    frame_index: int
    ego: EgoState
    actors: list[Actor]
    controls: list[TrafficControl]
    lane_graph: LaneGraph
    weather: WeatherState
    meta: ScenarioMeta

    @property
    def time_s(self) -> float:
        return self.frame_index * DT

    def actor(self, actor_id: str) -> Actor:
        for a in self.actors:
            if a.id == actor_id:
                return a
        raise KeyError(actor_id)


@dataclass(frozen=True)
class ControlSignal:
    """Actuation command: all channels normalized, steer left-negative."""
    steer: float = 0.0      # [-1, 1]
    throttle: float = 0.0   # [0, 1]
    brake: float = 0.0      # [0, 1]


def clamp_signal(sig: ControlSignal) -> ControlSignal:
    return ControlSignal(
        steer=min(1.0, max(-1.0, sig.steer)),
        throttle=min(1.0, max(0.0, sig.throttle)),
        brake=min(1.0, max(0.0, sig.brake)),
    )


# ---------- serialization ----------

def _pose_to(p: Pose) -> dict:
    return {"x": p.x, "y": p.y, "heading": p.heading}


def _pose_from(d: dict) -> Pose:
    return Pose(d["x"], d["y"], d["heading"])


def world_to_dict(w: WorldState) -> dict:
    return {
        "schema": "lanebench.world_state/1",
        "frame_index": w.frame_index,
        "ego": {
            "pose": _pose_to(w.ego.pose),
            "speed": w.ego.speed,
            "route": [list(p) for p in w.ego.route],
            "route_lane_ids": list(w.ego.route_lane_ids),
            "current_lane": w.ego.current_lane,
            "lateral_offset": w.ego.lateral_offset,
            "command": w.ego.command,
            "remembered_speed_limit": w.ego.remembered_speed_limit,
            "length": w.ego.length,
            "width": w.ego.width,
        },
        "actors": [
            {
                "id": a.id, "kind": a.kind, "pose": _pose_to(a.pose), "speed": a.speed,
                "length": a.length, "width": a.width, "name": a.name, "color": a.color,
                "is_role": a.is_role, "lidar_point_proxy": a.lidar_point_proxy,
                "motion": {
                    "kind": a.motion.kind,
                    "path": [list(p) for p in a.motion.path],
                    "s": a.motion.s,
                    "speed": a.motion.speed,
                    "offset_profile": [list(p) for p in a.motion.offset_profile],
                    "schedule": [list(p) for p in a.motion.schedule],
                },
            }
            for a in w.actors
        ],
        "controls": [
            {
                "id": c.id, "kind": c.kind, "pose": _pose_to(c.pose),
                "lane_id": c.lane_id, "s_on_lane": c.s_on_lane, "state": c.state,
                "value": c.value, "affects_ego": c.affects_ego,
                "phases": [[s, d] for s, d in c.phases],
                "phase_elapsed": c.phase_elapsed, "satisfied": c.satisfied,
                "dwell_s": c.dwell_s, "crossed": c.crossed,
            }
            for c in w.controls
        ],
        "lane_graph": {
            "lanes": [
                {
                    "id": ln.id, "centerline": [list(p) for p in ln.centerline],
                    "width": ln.width, "direction": ln.direction,
                    "left_neighbor": ln.left_neighbor, "right_neighbor": ln.right_neighbor,
                    "left_marking": ln.left_marking, "right_marking": ln.right_marking,
                    "speed_limit": ln.speed_limit, "in_junction": ln.in_junction,
                    "successors": list(ln.successors),
                }
                for ln in w.lane_graph.lanes.values()
            ],
            "junctions": [{"id": j.id, "lane_ids": list(j.lane_ids)} for j in w.lane_graph.junctions],
        },
        "weather": {
            "time_of_day": w.weather.time_of_day,
            "condition": w.weather.condition,
            "in_tunnel": w.weather.in_tunnel,
        },
        "meta": {
            "name": w.meta.name, "version": w.meta.version, "seed": w.meta.seed,
            "tick_budget": w.meta.tick_budget, "target_cruise": w.meta.target_cruise,
            "roles": dict(w.meta.roles),
            "tunnel_zones": [[z.lane_id, z.s0, z.s1] for z in w.meta.tunnel_zones],
        },
    }


def world_from_dict(d: dict) -> WorldState:
    ego_d = d["ego"]
    ego = EgoState(
        pose=_pose_from(ego_d["pose"]),
        speed=ego_d["speed"],
        route=[tuple(p) for p in ego_d["route"]],
        route_lane_ids=list(ego_d["route_lane_ids"]),
        current_lane=ego_d.get("current_lane"),
        lateral_offset=ego_d.get("lateral_offset"),
        command=ego_d.get("command", "follow-lane"),
        remembered_speed_limit=ego_d.get("remembered_speed_limit"),
        length=ego_d.get("length", EGO_LENGTH),
        width=ego_d.get("width", EGO_WIDTH),
    )
    actors = [
        Actor(
            id=a["id"], kind=a["kind"], pose=_pose_from(a["pose"]), speed=a["speed"],
            length=a.get("length", 4.5), width=a.get("width", 2.0),
            name=a.get("name", ""), color=a.get("color", ""),
            is_role=a.get("is_role", False),
            lidar_point_proxy=a.get("lidar_point_proxy", 50),
            motion=MotionScript(
                kind=a.get("motion", {}).get("kind", "static"),
                path=[tuple(p) for p in a.get("motion", {}).get("path", [])],
                s=a.get("motion", {}).get("s", 0.0),
                speed=a.get("motion", {}).get("speed", 0.0),
                offset_profile=[tuple(p) for p in a.get("motion", {}).get("offset_profile", [])],
                schedule=[tuple(p) for p in a.get("motion", {}).get("schedule", [])],
            ),
        )
        for a in d["actors"]
    ]
    controls = [
        TrafficControl(
            id=c["id"], kind=c["kind"], pose=_pose_from(c["pose"]),
            lane_id=c.get("lane_id"), s_on_lane=c.get("s_on_lane", 0.0),
            state=c.get("state"), value=c.get("value"),
            affects_ego=c.get("affects_ego", False),
            phases=[(s, dur) for s, dur in c.get("phases", [])],
            phase_elapsed=c.get("phase_elapsed", 0.0),
            satisfied=c.get("satisfied", False),
            dwell_s=c.get("dwell_s", 0.0),
            crossed=c.get("crossed", False),
        )
        for c in d["controls"]
    ]
    lanes = {
        ln["id"]: Lane(
            id=ln["id"], centerline=[tuple(p) for p in ln["centerline"]],
            width=ln["width"], direction=ln.get("direction", "same"),
            left_neighbor=ln.get("left_neighbor"), right_neighbor=ln.get("right_neighbor"),
            left_marking=ln.get("left_marking", "solid"),
            right_marking=ln.get("right_marking", "solid"),
            speed_limit=ln.get("speed_limit"), in_junction=ln.get("in_junction", False),
            successors=list(ln.get("successors", [])),
        )
        for ln in d["lane_graph"]["lanes"]
    }
    graph = LaneGraph(
        lanes=lanes,
        junctions=[Junction(j["id"], list(j["lane_ids"])) for j in d["lane_graph"].get("junctions", [])],
    )
    meta_d = d["meta"]
    meta = ScenarioMeta(
        name=meta_d["name"], version=meta_d.get("version", 1), seed=meta_d.get("seed", 0),
        tick_budget=meta_d.get("tick_budget", 600),
        target_cruise=meta_d.get("target_cruise", 8.33),
        roles=dict(meta_d.get("roles", {})),
        tunnel_zones=[TunnelZone(z[0], z[1], z[2]) for z in meta_d.get("tunnel_zones", [])],
    )
    weather_d = d.get("weather", {})
    weather = WeatherState(
        time_of_day=weather_d.get("time_of_day", "day"),
        condition=weather_d.get("condition", "clear"),
        in_tunnel=weather_d.get("in_tunnel", False),
    )
    return WorldState(
        frame_index=d["frame_index"], ego=ego, actors=actors, controls=controls,
        lane_graph=graph, weather=weather, meta=meta,
    )


def copy_world(w: WorldState) -> WorldState:
    """Deep copy through plain dataclass reconstruction."""
    return world_from_dict(world_to_dict(w))


def replace(obj, **kw):
    return dataclasses.replace(obj, **kw)
