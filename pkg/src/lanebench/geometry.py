"""Planar polyline helpers shared by the simulator, the expert and the controller.

Conventions used across the package:
  * headings are radians, counter-clockwise, 0 along +x;
  * signed lateral offsets are negative to the LEFT of the travel direction and
    positive to the right.
"""
from __future__ import annotations

import math

Vec = tuple[float, float]


def dist(a: Vec, b: Vec) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    while a <= -math.pi:
        a += 2.0 * math.pi
    while a > math.pi:
        a -= 2.0 * math.pi
    return a


def heading_of(p0: Vec, p1: Vec) -> float:
    return math.atan2(p1[1] - p0[1], p1[0] - p0[0])


def cumulative_lengths(pts: list[Vec]) -> list[float]:
    acc = [0.0]
    for i in range(1, len(pts)):
        acc.append(acc[-1] + dist(pts[i - 1], pts[i]))
    return acc


def polyline_length(pts: list[Vec]) -> float:
    return cumulative_lengths(pts)[-1] if pts else 0.0


def resample_polyline(pts: list[Vec], spacing: float) -> list[Vec]:
    """Evenly spaced points along the polyline, endpoints preserved."""
    if len(pts) < 2:
        return list(pts)
    total = polyline_length(pts)
    if total <= 1e-12:
        return [pts[0]]
    n = max(1, int(math.ceil(total / spacing)))
    out: list[Vec] = []
    for i in range(n + 1):
        s = min(total, i * total / n)
        out.append(point_at_s(pts, s)[0])
    return out


def point_at_s(pts: list[Vec], s: float) -> tuple[Vec, float]:
    """Point and tangent heading at arclength s (clamped to the ends)."""
    acc = cumulative_lengths(pts)
    total = acc[-1]
    if s <= 0.0:
        seg = _first_nondegenerate(pts)
        return pts[0], heading_of(pts[seg], pts[seg + 1])
    if s >= total:
        seg = _last_nondegenerate(pts)
        return pts[-1], heading_of(pts[seg], pts[seg + 1])
    for i in range(1, len(pts)):
        if acc[i] >= s:
            seg_len = acc[i] - acc[i - 1]
            t = 0.0 if seg_len <= 1e-12 else (s - acc[i - 1]) / seg_len
            p0, p1 = pts[i - 1], pts[i]
            pt = (p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1]))
            return pt, heading_of(p0, p1)
    seg = _last_nondegenerate(pts)
    return pts[-1], heading_of(pts[seg], pts[seg + 1])


def _first_nondegenerate(pts: list[Vec]) -> int:
    for i in range(len(pts) - 1):
        if dist(pts[i], pts[i + 1]) > 1e-12:
            return i
    return 0


def _last_nondegenerate(pts: list[Vec]) -> int:
    for i in range(len(pts) - 2, -1, -1):
        if dist(pts[i], pts[i + 1]) > 1e-12:
            return i
    return max(0, len(pts) - 2)


def project_to_polyline(pts: list[Vec], p: Vec) -> tuple[float, float, Vec]:
    """Project p onto the polyline.

    Returns (arclength of the projection, signed lateral offset, projected point).
    The offset is negative when p lies to the left of the travel direction.
    """
    acc = cumulative_lengths(pts)
    best: tuple[float, float, Vec] | None = None
    best_abs = math.inf
    for i in range(1, len(pts)):
        p0, p1 = pts[i - 1], pts[i]
        vx, vy = p1[0] - p0[0], p1[1] - p0[1]
        seg_len2 = vx * vx + vy * vy
        if seg_len2 <= 1e-24:
            continue
        t = ((p[0] - p0[0]) * vx + (p[1] - p0[1]) * vy) / seg_len2
        t = min(1.0, max(0.0, t))
        proj = (p0[0] + t * vx, p0[1] + t * vy)
        d = dist(p, proj)
        if d < best_abs:
            seg_len = math.sqrt(seg_len2)
            # left normal of the segment direction
            lx, ly = -vy / seg_len, vx / seg_len
            left_comp = (p[0] - proj[0]) * lx + (p[1] - proj[1]) * ly
            # Past the polyline ends d exceeds |left_comp|; report the full
            # distance so corridor checks never adopt points beyond the ends.
            offset = math.copysign(d, -left_comp) if left_comp != 0.0 else d
            best = (acc[i - 1] + t * seg_len, offset, proj)
            best_abs = d
    if best is None:
        return 0.0, 0.0, pts[0]
    return best


def offset_polyline(pts: list[Vec], offset: float) -> list[Vec]:
    """Shift laterally; positive offset moves points to the RIGHT of travel."""
    if len(pts) < 2:
        return list(pts)
    out: list[Vec] = []
    for i, p in enumerate(pts):
        if i == 0:
            h = heading_of(pts[0], pts[1])
        elif i == len(pts) - 1:
            h = heading_of(pts[-2], pts[-1])
        else:
            h = heading_of(pts[i - 1], pts[i + 1])
        # right normal of heading h is (sin h, -cos h)
        out.append((p[0] + offset * math.sin(h), p[1] - offset * math.cos(h)))
    return out


def slice_by_s(pts: list[Vec], s0: float, s1: float, spacing: float = 1.0) -> list[Vec]:
    """Resampled sub-polyline between arclengths s0 and s1 (clamped)."""
    total = polyline_length(pts)
    s0 = max(0.0, min(s0, total))
    s1 = max(s0, min(s1, total))
    if s1 - s0 <= 1e-9:
        return [point_at_s(pts, s0)[0]]
    n = max(1, int(math.ceil((s1 - s0) / spacing)))
    return [point_at_s(pts, s0 + (s1 - s0) * i / n)[0] for i in range(n + 1)]


def blend_to_path(pos: Vec, target: list[Vec], blend_dist: float,
                  horizon: float, spacing: float = 1.0) -> list[Vec]:
    """Waypoints that merge from pos onto `target` over blend_dist, then follow it.

    The current lateral displacement from the target path decays linearly to zero
    across the blend distance.
    """
    s0, _, proj = project_to_polyline(target, pos)
    off = (pos[0] - proj[0], pos[1] - proj[1])
    total = polyline_length(target)
    end = min(total, s0 + horizon)
    if end - s0 <= spacing:
        return [point_at_s(target, end)[0]]
    n = max(2, int(math.ceil((end - s0) / spacing)))
    out: list[Vec] = []
    for i in range(1, n + 1):
        d = (end - s0) * i / n
        base = point_at_s(target, s0 + d)[0]
        w = 1.0 - min(1.0, d / max(blend_dist, 1e-9))
        out.append((base[0] + off[0] * w, base[1] + off[1] * w))
    return out


def bearing_sector(angle: float) -> str:
    """8-way sector name for an angle expressed in the ego frame (0 = ahead, CCW+)."""
    names = ["front", "front-left", "left", "rear-left",
             "rear", "rear-right", "right", "front-right"]
    idx = int(math.floor((wrap_angle(angle) + math.pi / 8.0) / (math.pi / 4.0))) % 8
    return names[idx]
