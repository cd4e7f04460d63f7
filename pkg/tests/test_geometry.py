from __future__ import annotations

import math

import pytest

from lanebench.geometry import (bearing_sector, blend_to_path,
                                cumulative_lengths, dist, offset_polyline,
                                point_at_s, polyline_length,
                                project_to_polyline, resample_polyline,
                                slice_by_s, wrap_angle)

STRAIGHT = [(0.0, 0.0), (100.0, 0.0)]


def test_projection_interior_point():
    s, off, proj = project_to_polyline(STRAIGHT, (40.0, 2.0))
    assert s == pytest.approx(40.0)
    assert off == pytest.approx(-2.0)  # left of travel direction is negative
    assert proj == pytest.approx((40.0, 0.0))


def test_projection_right_side_positive():
    _, off, _ = project_to_polyline(STRAIGHT, (40.0, -2.0))
    assert off == pytest.approx(2.0)


def test_projection_past_end_reports_full_distance():
    # collinear beyond the last vertex: the offset must carry the whole
    # residual, not the (zero) lateral component
    s, off, proj = project_to_polyline(STRAIGHT, (116.0, 0.0))
    assert s == pytest.approx(100.0)
    assert abs(off) == pytest.approx(16.0)
    assert proj == pytest.approx((100.0, 0.0))


def test_projection_before_start_reports_full_distance():
    s, off, _ = project_to_polyline(STRAIGHT, (-9.0, 0.0))
    assert s == pytest.approx(0.0)
    assert abs(off) == pytest.approx(9.0)


def test_projection_past_end_oblique():
    _, off, _ = project_to_polyline(STRAIGHT, (103.0, 4.0))
    assert abs(off) == pytest.approx(5.0)


def test_offset_polyline_positive_shifts_right():
    shifted = offset_polyline(STRAIGHT, 1.5)
    assert shifted[0][1] == pytest.approx(-1.5)
    assert shifted[-1][1] == pytest.approx(-1.5)


def test_point_at_s_midpoint_and_heading():
    pts = [(0.0, 0.0), (10.0, 0.0), (10.0, 10.0)]
    p, heading = point_at_s(pts, 15.0)
    assert p == pytest.approx((10.0, 5.0))
    assert heading == pytest.approx(math.pi / 2)


def test_cumulative_and_length():
    pts = [(0.0, 0.0), (3.0, 4.0), (3.0, 10.0)]
    assert cumulative_lengths(pts) == pytest.approx([0.0, 5.0, 11.0])
    assert polyline_length(pts) == pytest.approx(11.0)


def test_resample_spacing():
    pts = resample_polyline(STRAIGHT, spacing=1.0)
    assert len(pts) == 101
    for a, b in zip(pts, pts[1:]):
        assert dist(a, b) == pytest.approx(1.0, abs=1e-6)


def test_slice_by_s_window():
    pts = slice_by_s(STRAIGHT, 20.0, 30.0, spacing=1.0)
    assert pts[0][0] == pytest.approx(20.0)
    assert pts[-1][0] == pytest.approx(30.0)


def test_blend_reaches_target_path():
    target = offset_polyline(STRAIGHT, 3.5)
    blended = blend_to_path((10.0, 0.0), target, blend_dist=15.0, horizon=40.0)
    # starts near the current lateral position, ends on the target path
    assert blended[0][1] == pytest.approx(0.0, abs=0.4)
    assert blended[-1][1] == pytest.approx(-3.5, abs=0.05)
    laterals = [p[1] for p in blended]
    assert laterals == sorted(laterals, reverse=True)  # monotone merge


def test_wrap_angle_range():
    for a in (-9.0, -3.2, 0.0, 3.2, 9.0):
        w = wrap_angle(a)
        assert -math.pi <= w <= math.pi


def test_bearing_sector_names():
    assert bearing_sector(0.0) == "front"
    assert bearing_sector(math.pi) == "rear"
    assert bearing_sector(math.pi / 2) == "left"
    assert bearing_sector(-math.pi / 2) == "right"
    assert bearing_sector(math.pi / 4) == "front-left"
    assert bearing_sector(-math.pi / 4) == "front-right"
