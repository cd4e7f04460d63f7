"""Scenario document loading.

Scenarios are plain YAML documents (schema version 1) describing the lane graph,
the ego start, background actors, traffic controls and weather. Loading is
deterministic: the same document and seed always produce the same WorldState.
"""
from __future__ import annotations

import math
from importlib import resources
from pathlib import Path

import yaml

from ..geometry import Vec, point_at_s, polyline_length
from .types import (
    Actor,
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
    ACTOR_KINDS,
    CONTROL_KINDS,
)

SCHEMA_VERSION = 1
MARKINGS = ("solid", "broken", "none")


class ScenarioError(ValueError):
    """Malformed or inconsistent scenario document."""


def builtin_scenario_names() -> list[str]:
    pkg = resources.files("lanebench") / "scenarios"
    return sorted(p.name[:-5] for p in pkg.iterdir() if p.name.endswith(".yaml"))


def load_scenario(source: str | Path | dict, seed: int | None = None) -> WorldState:
    """Build frame-0 WorldState from a document, file path or bundled name."""
    if isinstance(source, dict):
        doc = source
    else:
        text = _read_source(source)
        doc = yaml.safe_load(text)
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a mapping")
    return _build(doc, seed)


def _read_source(source: str | Path) -> str:
    p = Path(source)
    if p.suffix in (".yaml", ".yml") or p.exists():
        return p.read_text()
    # bundled scenario referenced by bare name
    ref = resources.files("lanebench") / "scenarios" / f"{source}.yaml"
    if not ref.is_file():
        raise ScenarioError(
            f"unknown scenario {source!r}; bundled: {', '.join(builtin_scenario_names())}")
    return ref.read_text()


def _limit_mps(entry: dict) -> float | None:
    if entry.get("speed_limit_kmh") is not None:
        return float(entry["speed_limit_kmh"]) / 3.6
    if entry.get("speed_limit") is not None:
        return float(entry["speed_limit"])
    return None


def _build(doc: dict, seed: int | None) -> WorldState:
    version = doc.get("version")
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported scenario schema version: {version!r}")
    name = doc.get("name")
    if not name:
        raise ScenarioError("scenario needs a name")

    lanes: dict[str, Lane] = {}
    for entry in doc.get("lanes", []):
        lane = Lane(
            id=str(entry["id"]),
            centerline=[(float(x), float(y)) for x, y in entry["centerline"]],
            width=float(entry.get("width", 3.5)),
            direction=entry.get("direction", "same"),
            left_neighbor=entry.get("left_neighbor"),
            right_neighbor=entry.get("right_neighbor"),
            left_marking=entry.get("left_marking", "solid"),
            right_marking=entry.get("right_marking", "solid"),
            speed_limit=_limit_mps(entry),
            in_junction=bool(entry.get("in_junction", False)),
            successors=[str(s) for s in entry.get("successors", [])],
        )
        if lane.width <= 0:
            raise ScenarioError(f"lane {lane.id}: width must be positive")
        if len(lane.centerline) < 2:
            raise ScenarioError(f"lane {lane.id}: centerline needs at least 2 points")
        if lane.direction not in ("same", "opposite"):
            raise ScenarioError(f"lane {lane.id}: bad direction {lane.direction!r}")
        if lane.left_marking not in MARKINGS or lane.right_marking not in MARKINGS:
            raise ScenarioError(f"lane {lane.id}: bad marking")
        if lane.id in lanes:
            raise ScenarioError(f"duplicate lane id {lane.id}")
        lanes[lane.id] = lane
    if not lanes:
        raise ScenarioError("scenario needs at least one lane")

    for lane in lanes.values():
        for ref in lane.successors:
            if ref not in lanes:
                raise ScenarioError(f"lane {lane.id}: successor {ref} does not resolve")
        for side in ("left_neighbor", "right_neighbor"):
            ref = getattr(lane, side)
            if ref is not None and ref not in lanes:
                raise ScenarioError(f"lane {lane.id}: {side} {ref} does not resolve")
    # neighbor links must be symmetric where declared on both lanes
    for lane in lanes.values():
        if lane.left_neighbor:
            other = lanes[lane.left_neighbor]
            if other.right_neighbor not in (None, lane.id):
                raise ScenarioError(f"asymmetric neighbor link {lane.id}/{other.id}")
        if lane.right_neighbor:
            other = lanes[lane.right_neighbor]
            if other.left_neighbor not in (None, lane.id):
                raise ScenarioError(f"asymmetric neighbor link {lane.id}/{other.id}")

    junctions = []
    for j in doc.get("junctions", []):
        for ref in j.get("lanes", []):
            if ref not in lanes:
                raise ScenarioError(f"junction {j.get('id')}: lane {ref} does not resolve")
        junctions.append(Junction(id=str(j["id"]), lane_ids=[str(x) for x in j["lanes"]]))
    graph = LaneGraph(lanes=lanes, junctions=junctions)

    ego_doc = doc.get("ego")
    if not ego_doc:
        raise ScenarioError("scenario needs an ego block")
    route_ids = [str(x) for x in ego_doc.get("route", [])]
    if not route_ids:
        raise ScenarioError("ego.route must list at least one lane")
    for i, lid in enumerate(route_ids):
        if lid not in lanes:
            raise ScenarioError(f"ego.route lane {lid} does not resolve")
        if i and lid not in lanes[route_ids[i - 1]].successors:
            raise ScenarioError(
                f"ego.route {route_ids[i-1]} -> {lid} is not a successor link")
    route, route_lane_ids = _route_polyline(graph, route_ids)

    start_lane = lanes[str(ego_doc.get("lane", route_ids[0]))]
    s0 = float(ego_doc.get("s", 0.0))
    pos, heading = point_at_s(start_lane.centerline, s0)
    ego = EgoState(
        pose=Pose(pos[0], pos[1], heading),
        speed=float(ego_doc.get("speed", 0.0)),
        route=route,
        route_lane_ids=route_lane_ids,
    )

    roles = {str(k): str(v) for k, v in (doc.get("roles") or {}).items()}

    actors: list[Actor] = []
    for entry in doc.get("actors", []):
        actors.append(_build_actor(entry, graph, roles))
    ids = [a.id for a in actors]
    if len(set(ids)) != len(ids):
        raise ScenarioError("duplicate actor ids")

    controls: list[TrafficControl] = []
    for entry in doc.get("controls", []):
        controls.append(_build_control(entry, graph))

    weather_doc = doc.get("weather") or {}
    weather = WeatherState(
        time_of_day=weather_doc.get("time_of_day", "day"),
        condition=weather_doc.get("condition", "clear"),
        in_tunnel=bool(weather_doc.get("in_tunnel", False)),
    )

    zones = [TunnelZone(str(z[0]), float(z[1]), float(z[2])) for z in doc.get("tunnel", [])]
    meta = ScenarioMeta(
        name=str(name),
        version=SCHEMA_VERSION,
        seed=int(doc.get("seed", 0) if seed is None else seed),
        tick_budget=int(doc.get("tick_budget", 600)),
        target_cruise=float(doc.get("target_cruise", 8.33)),
        roles=roles,
        tunnel_zones=zones,
    )

    world = WorldState(
        frame_index=0, ego=ego, actors=actors, controls=controls,
        lane_graph=graph, weather=weather, meta=meta,
    )
    from .sim import refresh_derived  # late import, sim depends on these types
    refresh_derived(world)
    return world


def _route_polyline(graph: LaneGraph, route_ids: list[str],
                    spacing: float = 1.0) -> tuple[list[Vec], list[str]]:
    pts: list[Vec] = []
    lane_ids: list[str] = []
    for lid in route_ids:
        lane = graph.lane(lid)
        total = polyline_length(lane.centerline)
        n = max(1, int(math.ceil(total / spacing)))
        for i in range(n + 1):
            p = point_at_s(lane.centerline, total * i / n)[0]
            if pts and math.hypot(p[0] - pts[-1][0], p[1] - pts[-1][1]) < 1e-6:
                continue
            pts.append(p)
            lane_ids.append(lid)
    return pts, lane_ids


def _build_actor(entry: dict, graph: LaneGraph, roles: dict[str, str]) -> Actor:
    aid = str(entry["id"])
    kind = entry.get("kind", "vehicle")
    if kind not in ACTOR_KINDS:
        raise ScenarioError(f"actor {aid}: bad kind {kind!r}")
    behavior = entry.get("behavior", "static")
    motion = MotionScript(kind=behavior, speed=float(entry.get("speed", 0.0)))

    if "pose" in entry:
        x, y, hdeg = entry["pose"]
        pose = Pose(float(x), float(y), math.radians(float(hdeg)))
    elif "lane" in entry:
        lane = graph.lane(str(entry["lane"]))
        s = float(entry.get("s", 0.0))
        pos, heading = point_at_s(lane.centerline, s)
        pose = Pose(pos[0], pos[1], heading)
        if behavior == "lane-follow":
            motion.path = _chain_centerline(graph, lane)
            motion.s = s
            motion.offset_profile = [
                (float(a), float(b)) for a, b in entry.get("offset_profile", [])]
    else:
        raise ScenarioError(f"actor {aid}: needs pose or lane placement")

    if behavior == "scripted":
        motion.schedule = [(float(t), float(x), float(y)) for t, x, y in entry["schedule"]]
        if len(motion.schedule) < 2:
            raise ScenarioError(f"actor {aid}: scripted schedule needs >= 2 knots")
    elif behavior == "lane-follow" and not motion.path:
        raise ScenarioError(f"actor {aid}: lane-follow needs lane placement")
    elif behavior not in ("static", "lane-follow", "scripted"):
        raise ScenarioError(f"actor {aid}: bad behavior {behavior!r}")

    defaults = {"vehicle": (4.5, 2.0), "bicycle": (1.8, 0.6),
                "pedestrian": (0.5, 0.5), "static-obstacle": (1.0, 1.0)}
    dl, dw = defaults[kind]
    length = float(entry.get("length", dl))
    width = float(entry.get("width", dw))
    if length <= 0 or width <= 0:
        raise ScenarioError(f"actor {aid}: bbox must be positive")
    return Actor(
        id=aid, kind=kind, pose=pose, speed=float(entry.get("speed", 0.0)),
        length=length, width=width,
        name=entry.get("name", f"a {kind}"), color=entry.get("color", ""),
        is_role=aid in roles,
        lidar_point_proxy=int(entry.get("lidar_points", 50)),
        motion=motion,
    )


def _chain_centerline(graph: LaneGraph, lane: Lane) -> list[Vec]:
    """Lane centerline extended through successor lanes (first successor chain)."""
    pts = list(lane.centerline)
    seen = {lane.id}
    cur = lane
    while cur.successors:
        nxt = graph.lane(cur.successors[0])
        if nxt.id in seen:
            break
        seen.add(nxt.id)
        for p in nxt.centerline:
            if pts and math.hypot(p[0] - pts[-1][0], p[1] - pts[-1][1]) < 1e-6:
                continue
            pts.append(p)
        cur = nxt
    return pts


def _build_control(entry: dict, graph: LaneGraph) -> TrafficControl:
    cid = str(entry["id"])
    kind = entry.get("kind")
    if kind not in CONTROL_KINDS:
        raise ScenarioError(f"control {cid}: bad kind {kind!r}")
    lane = graph.lane(str(entry["lane"]))
    s = float(entry.get("s", 0.0))
    pos, heading = point_at_s(lane.centerline, s)
    # signs stand at the right road edge; lights sit on the stop line
    if kind != "traffic-light":
        side = lane.width / 2.0 + 0.5
        pos = (pos[0] + side * math.sin(heading), pos[1] - side * math.cos(heading))
    ctl = TrafficControl(
        id=cid, kind=kind, pose=Pose(pos[0], pos[1], heading),
        lane_id=lane.id, s_on_lane=s,
    )
    if kind == "traffic-light":
        phases = entry.get("phases") or [["red", 10.0], ["green", 10.0], ["yellow", 2.0]]
        ctl.phases = [(str(st), float(dur)) for st, dur in phases]
        states = [st for st, _ in ctl.phases]
        if len(set(states)) != len(states):
            raise ScenarioError(f"control {cid}: phase states must be unique")
        ctl.state = ctl.phases[0][0]
        ctl.phase_elapsed = float(entry.get("initial_elapsed", 0.0))
    elif kind == "speed-limit-sign":
        val = _limit_mps({"speed_limit_kmh": entry.get("value_kmh"),
                          "speed_limit": entry.get("value")})
        if val is None:
            raise ScenarioError(f"control {cid}: speed-limit sign needs a value")
        ctl.value = val
    return ctl
