"""Top-down raster rendering of the world, OpenCV drawing onto a numpy canvas."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import cv2
import numpy as np

from ..geometry import Vec, offset_polyline
from .types import Actor, WorldState

BG = (38, 38, 38)
ROAD = (70, 70, 70)
JUNCTION_ROAD = (82, 82, 78)
MARKING = (210, 210, 210)
TRAIL = (140, 120, 170)
EGO_COLOR = (255, 80, 0)        # BGR blue
VEHICLE_COLOR = (60, 160, 250)
BICYCLE_COLOR = (80, 220, 120)
PEDESTRIAN_COLOR = (255, 255, 0)  # BGR cyan outline
OBSTACLE_COLOR = (90, 90, 200)
TEXT_COLOR = (235, 235, 235)
LIGHT_COLORS = {"red": (40, 40, 255), "yellow": (50, 230, 255), "green": (80, 220, 80)}


@dataclass
class RenderOptions:
    size_px: int = 512
    px_per_m: float = 4.0
    trails: dict[str, list[Vec]] = field(default_factory=dict)
    draw_trails: bool = True


def render_bev(world: WorldState, options: RenderOptions | None = None) -> np.ndarray:
    """BGR raster centered on ego, ego heading pointing up."""
    opt = options or RenderOptions()
    n = opt.size_px
    img = np.full((n, n, 3), BG, dtype=np.uint8)
    ego = world.ego.pose
    rot = math.pi / 2.0 - ego.heading
    cr, sr = math.cos(rot), math.sin(rot)

    def to_px(p: Vec) -> tuple[int, int]:
        dx, dy = p[0] - ego.x, p[1] - ego.y
        rx = dx * cr - dy * sr
        ry = dx * sr + dy * cr
        return (int(round(n / 2 + rx * opt.px_per_m)),
                int(round(n / 2 - ry * opt.px_per_m)))

    def poly_px(pts: list[Vec]) -> np.ndarray:
        return np.array([to_px(p) for p in pts], dtype=np.int32)

    for lane in sorted(world.lane_graph.lanes.values(), key=lambda l: l.id):
        road = JUNCTION_ROAD if lane.in_junction else ROAD
        cv2.polylines(img, [poly_px(lane.centerline)], False, road,
                      max(2, int(lane.width * opt.px_per_m)), cv2.LINE_8)
    for lane in sorted(world.lane_graph.lanes.values(), key=lambda l: l.id):
        for side, marking in (("left", lane.left_marking), ("right", lane.right_marking)):
            if marking == "none":
                continue
            sign = -1.0 if side == "left" else 1.0
            edge = offset_polyline(lane.centerline, sign * lane.width / 2.0)
            if marking == "solid":
                cv2.polylines(img, [poly_px(edge)], False, MARKING, 1, cv2.LINE_8)
            else:  # broken: alternating 2 m dashes
                _dashes(img, edge, to_px)

    if opt.draw_trails:
        for actor_id in sorted(opt.trails):
            anchors = opt.trails[actor_id]
            if len(anchors) >= 2:
                cv2.polylines(img, [poly_px(anchors)], False, TRAIL, 1, cv2.LINE_8)

    for ctl in world.controls:
        if not ctl.affects_ego:
            continue
        c = to_px((ctl.pose.x, ctl.pose.y))
        if ctl.kind == "traffic-light":
            cv2.circle(img, c, 6, LIGHT_COLORS.get(ctl.state or "red", (200, 200, 200)), -1)
            cv2.circle(img, c, 6, (20, 20, 20), 1)
        elif ctl.kind == "stop-sign":
            cv2.circle(img, c, 7, (40, 40, 255), -1)
            cv2.putText(img, "S", (c[0] - 4, c[1] + 4),
                        cv2.FONT_HERSHEY_PLAIN, 0.9, (255, 255, 255), 1)
        elif ctl.kind == "speed-limit-sign":
            cv2.circle(img, c, 7, (240, 240, 240), -1)
            cv2.circle(img, c, 7, (40, 40, 255), 1)
            kmh = int(round((ctl.value or 0.0) * 3.6))
            cv2.putText(img, str(kmh), (c[0] - 8, c[1] + 4),
                        cv2.FONT_HERSHEY_PLAIN, 0.8, (30, 30, 30), 1)
        else:
            pts = np.array([[c[0], c[1] - 7], [c[0] - 6, c[1] + 5], [c[0] + 6, c[1] + 5]],
                           dtype=np.int32)
            cv2.polylines(img, [pts], True, (60, 200, 255), 1)
        cv2.putText(img, ctl.id, (c[0] + 8, c[1] + 4),
                    cv2.FONT_HERSHEY_PLAIN, 0.8, TEXT_COLOR, 1)

    for actor in sorted(world.actors, key=lambda a: a.id):
        _draw_actor(img, actor, to_px)

    _draw_box(img, ego.xy, ego.heading, world.ego.length, world.ego.width,
              EGO_COLOR, to_px, filled=True)
    label = to_px(ego.xy)
    cv2.putText(img, "the ego vehicle", (label[0] + 8, label[1] - 8),
                cv2.FONT_HERSHEY_PLAIN, 0.9, EGO_COLOR, 1)
    return img


def render_bev_png(world: WorldState, options: RenderOptions | None = None) -> bytes:
    ok, buf = cv2.imencode(".png", render_bev(world, options))
    if not ok:
        raise RuntimeError("PNG encoding failed")
    return bytes(buf)


def _dashes(img, edge: list[Vec], to_px, dash_m: float = 2.0) -> None:
    acc = 0.0
    draw = True
    for a, b in zip(edge, edge[1:]):
        if draw:
            cv2.line(img, to_px(a), to_px(b), MARKING, 1, cv2.LINE_8)
        acc += math.hypot(b[0] - a[0], b[1] - a[1])
        if acc >= dash_m:
            acc = 0.0
            draw = not draw


def _box_corners(center: Vec, heading: float, length: float, width: float) -> list[Vec]:
    ch, sh = math.cos(heading), math.sin(heading)
    hl, hw = length / 2.0, width / 2.0
    out = []
    for lx, ly in ((hl, hw), (hl, -hw), (-hl, -hw), (-hl, hw)):
        out.append((center[0] + lx * ch - ly * sh, center[1] + lx * sh + ly * ch))
    return out


def _draw_box(img, center: Vec, heading: float, length: float, width: float,
              color, to_px, filled: bool = False) -> None:
    pts = np.array([to_px(p) for p in _box_corners(center, heading, length, width)],
                   dtype=np.int32)
    if filled:
        cv2.fillPoly(img, [pts], color)
    else:
        cv2.polylines(img, [pts], True, color, 1, cv2.LINE_8)
    nose = (center[0] + math.cos(heading) * length * 0.9,
            center[1] + math.sin(heading) * length * 0.9)
    cv2.arrowedLine(img, to_px(center), to_px(nose), color, 1, cv2.LINE_8, tipLength=0.4)


def _draw_actor(img, actor: Actor, to_px) -> None:
    c = to_px((actor.pose.x, actor.pose.y))
    if actor.kind == "pedestrian":
        cv2.circle(img, c, max(2, int(round(actor.width * 2))), PEDESTRIAN_COLOR, 1)
    elif actor.kind == "static-obstacle":
        _draw_box(img, actor.pose.xy, actor.pose.heading, actor.length, actor.width,
                  OBSTACLE_COLOR, to_px, filled=True)
    else:
        color = BICYCLE_COLOR if actor.kind == "bicycle" else VEHICLE_COLOR
        _draw_box(img, actor.pose.xy, actor.pose.heading, actor.length, actor.width,
                  color, to_px)
    cv2.putText(img, actor.id, (c[0] + 6, c[1] - 6),
                cv2.FONT_HERSHEY_PLAIN, 0.9, TEXT_COLOR, 1)
