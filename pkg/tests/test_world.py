from __future__ import annotations

import copy
import math

import pytest

from lanebench.world import (ControlSignal, Pose, WorldState, clamp_signal,
                             copy_world, effective_speed_limit, footprint,
                             load_scenario, refresh_derived, route_progress,
                             step, world_from_dict, world_to_dict)
from lanebench.world.sim import STOP_DWELL_NEEDED, control_route_s


def _drive(world: WorldState, controls, n: int) -> WorldState:
    for i in range(n):
        world = step(world, controls(i))
        refresh_derived(world)
    return world


def test_step_is_deterministic():
    ctl = lambda i: ControlSignal(throttle=0.4 if i % 3 else 0.0, steer=0.05)
    a = _drive(load_scenario("follow_lead", seed=3), ctl, 50)
    b = _drive(load_scenario("follow_lead", seed=3), ctl, 50)
    assert world_to_dict(a) == world_to_dict(b)


def test_serialization_round_trip():
    world = _drive(load_scenario("signal_left", seed=1),
                   lambda i: ControlSignal(throttle=0.3), 37)
    doc = world_to_dict(world)
    assert world_to_dict(world_from_dict(doc)) == doc


def test_round_trip_resumes_identically():
    ctl = lambda i: ControlSignal(throttle=0.3, steer=0.02)
    a = _drive(load_scenario("sign_corridor"), ctl, 30)
    b = world_from_dict(world_to_dict(a))
    for i in range(30, 60):
        a = step(a, ctl(i))
        b = step(b, ctl(i))
        refresh_derived(a)
        refresh_derived(b)
    assert world_to_dict(a) == world_to_dict(b)


def test_traffic_light_cycles_through_phases():
    world = load_scenario("signal_left")
    light = next(c for c in world.controls if c.kind == "traffic-light")
    period = sum(d for _, d in light.phases)
    seen = set()
    idle = ControlSignal()
    for _ in range(int(period / 0.1) + 2):
        seen.add(light.state)
        world = step(world, idle)
        light = next(c for c in world.controls if c.kind == "traffic-light")
    assert seen == {s for s, _ in light.phases}


def test_traffic_light_returns_to_start_after_full_period():
    world = load_scenario("signal_left")
    light = next(c for c in world.controls if c.kind == "traffic-light")
    first = light.state
    period = sum(d for _, d in light.phases)
    for _ in range(round(period / 0.1)):
        world = step(world, ControlSignal())
    light = next(c for c in world.controls if c.kind == "traffic-light")
    assert light.state == first


def test_stop_sign_requires_dwell():
    world = load_scenario("sign_corridor")
    sign = next(c for c in world.controls if c.kind == "stop-sign")
    s_sign = control_route_s(world, sign)
    # teleport the ego just short of the sign, at standstill
    from lanebench.geometry import point_at_s
    pos, heading = point_at_s(world.ego.route, s_sign - 3.0)
    world.ego.pose = Pose(pos[0], pos[1], heading)
    world.ego.speed = 0.0
    refresh_derived(world)
    assert not sign.satisfied
    for _ in range(int(STOP_DWELL_NEEDED / 0.1)):
        refresh_derived(world)
    assert sign.satisfied
    assert not sign.affects_ego


def test_stop_sign_unsatisfied_while_moving():
    world = load_scenario("sign_corridor")
    sign = next(c for c in world.controls if c.kind == "stop-sign")
    from lanebench.geometry import point_at_s
    s_sign = control_route_s(world, sign)
    pos, heading = point_at_s(world.ego.route, s_sign - 3.0)
    world.ego.pose = Pose(pos[0], pos[1], heading)
    world.ego.speed = 4.0
    for _ in range(30):
        refresh_derived(world)
    assert not sign.satisfied


def test_speed_limit_sign_is_remembered_after_crossing():
    world = load_scenario("sign_corridor")
    sign = next(c for c in world.controls if c.kind == "speed-limit-sign")
    before = effective_speed_limit(world)
    assert before != sign.value
    s_sign = control_route_s(world, sign)
    from lanebench.geometry import point_at_s
    pos, heading = point_at_s(world.ego.route, s_sign + 2.0)
    world.ego.pose = Pose(pos[0], pos[1], heading)
    refresh_derived(world)
    assert world.ego.remembered_speed_limit == sign.value
    assert effective_speed_limit(world) == sign.value
    # moving further must not forget the posted value
    pos, heading = point_at_s(world.ego.route, s_sign + 40.0)
    world.ego.pose = Pose(pos[0], pos[1], heading)
    refresh_derived(world)
    assert effective_speed_limit(world) == sign.value


def test_footprint_axis_aligned():
    corners = footprint(Pose(10.0, 5.0, 0.0), length=4.0, width=2.0)
    xs = sorted(c[0] for c in corners)
    ys = sorted(c[1] for c in corners)
    assert xs == pytest.approx([8.0, 8.0, 12.0, 12.0])
    assert ys == pytest.approx([4.0, 4.0, 6.0, 6.0])


def test_footprint_rotation_swaps_extents():
    corners = footprint(Pose(0.0, 0.0, math.pi / 2), length=4.0, width=2.0)
    assert max(abs(c[0]) for c in corners) == pytest.approx(1.0)
    assert max(abs(c[1]) for c in corners) == pytest.approx(2.0)


def test_clamp_signal_ranges():
    sig = clamp_signal(ControlSignal(throttle=2.0, brake=-1.0, steer=9.0))
    assert 0.0 <= sig.throttle <= 1.0
    assert 0.0 <= sig.brake <= 1.0
    assert -1.0 <= sig.steer <= 1.0


def test_copy_world_is_independent():
    world = load_scenario("follow_lead")
    clone = copy_world(world)
    clone.ego.speed = 99.0
    clone.actors[0].pose = Pose(0.0, 0.0, 0.0)
    assert world.ego.speed != 99.0
    assert world.actors[0].pose.x != 0.0 or world.actors[0].pose.y != 0.0


def test_progress_increases_while_driving():
    world = load_scenario("follow_lead")
    start = route_progress(world)
    world = _drive(world, lambda i: ControlSignal(throttle=0.5), 80)
    assert route_progress(world) > start + 5.0


def test_frame_index_advances():
    world = load_scenario("follow_lead")
    assert world.frame_index == 0
    world = step(world, ControlSignal())
    assert world.frame_index == 1
    assert world.time_s == pytest.approx(0.1)
