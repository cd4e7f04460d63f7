from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lanebench.action import (ActionKeys, ActionPipeline, extract_keys,
                              plan_waypoints, resolve_defaults)
from lanebench.action.keys import DIRECTION_KEYS, SPEED_KEYS
from lanebench.action.pipeline import DEVIATE_OFFSET, apply_speed_key
from lanebench.expert import annotate_frame
from lanebench.geometry import point_at_s, project_to_polyline
from lanebench.world import (ControlSignal, Pose, at_or_entering_junction,
                             load_scenario, refresh_derived, step)


def _nominal_world(s: float = 20.0, speed: float = 6.0):
    world = load_scenario("follow_lead")
    pos, heading = point_at_s(world.ego.route, s)
    world.ego.pose = Pose(pos[0], pos[1], heading)
    world.ego.speed = speed
    refresh_derived(world)
    return world


# ---------- key extraction ----------

def test_extract_last_token_wins():
    keys = extract_keys("First I planned to ACCELERATE and CHANGE_LANE_LEFT, "
                        "but settled on FOLLOW_LANE and DECELERATE.")
    assert keys.direction == "FOLLOW_LANE"
    assert keys.speed == "DECELERATE"


def test_extract_case_insensitive_word_boundaries():
    keys = extract_keys("please stop. (follow_lane)")
    assert keys == ActionKeys(direction="FOLLOW_LANE", speed="STOP")
    # substrings inside larger words never match
    assert extract_keys("unstoppable keepsake") == ActionKeys(None, None)


def test_extract_missing_classes_are_none():
    assert extract_keys("drive safely") == ActionKeys(None, None)
    assert extract_keys("TURN_LEFT only") == ActionKeys("TURN_LEFT", None)


@given(st.lists(st.sampled_from(DIRECTION_KEYS + SPEED_KEYS), max_size=12),
       st.integers(0, 2 ** 31 - 1))
@settings(max_examples=200, deadline=None)
def test_extract_property_last_per_class(tokens, seed):
    rng = random.Random(seed)
    fillers = ["the", "vehicle", "should", "given traffic,", "then"]
    words = []
    for t in tokens:
        words.extend(rng.sample(fillers, rng.randint(0, 3)))
        words.append(t)
    text = " ".join(words)
    keys = extract_keys(text)
    dirs = [t for t in tokens if t in DIRECTION_KEYS]
    speeds = [t for t in tokens if t in SPEED_KEYS]
    assert keys.direction == (dirs[-1] if dirs else None)
    assert keys.speed == (speeds[-1] if speeds else None)


# ---------- default resolution ----------

def test_defaults_on_open_road():
    world = _nominal_world()
    assert not at_or_entering_junction(world)
    resolved = resolve_defaults(ActionKeys(), world)
    assert resolved == ActionKeys("FOLLOW_LANE", "KEEP")


def test_defaults_preserve_given_keys():
    world = _nominal_world()
    resolved = resolve_defaults(ActionKeys("DEVIATE_LEFT", "STOP"), world)
    assert resolved == ActionKeys("DEVIATE_LEFT", "STOP")


def test_default_direction_at_junction_follows_route():
    world = load_scenario("signal_left")
    # put the ego right at the junction entry
    from lanebench.world import next_junction_on_route
    refresh_derived(world)
    nxt = next_junction_on_route(world)
    assert nxt is not None
    junction_lane, dist = nxt
    s = project_to_polyline(world.ego.route, world.ego.pose.xy)[0] + dist
    pos, heading = point_at_s(world.ego.route, s + 1.0)
    world.ego.pose = Pose(pos[0], pos[1], heading)
    refresh_derived(world)
    assert at_or_entering_junction(world)
    resolved = resolve_defaults(ActionKeys(), world)
    assert resolved.direction == "TURN_LEFT"


# ---------- speed key semantics ----------

def test_apply_speed_key_values():
    assert apply_speed_key("STOP", 7.0, None) == 0.0
    assert apply_speed_key("KEEP", 7.0, None) == 7.0
    assert apply_speed_key("DECELERATE", 7.0, None) == 5.0
    assert apply_speed_key("DECELERATE", 1.0, None) == 0.0
    assert apply_speed_key("ACCELERATE", 7.0, None) == 9.0
    assert apply_speed_key("ACCELERATE", 7.0, 8.0) == 8.0  # capped at limit


def test_accelerate_hold_keeps_pushing():
    """Re-applying ACCELERATE against the current speed ratchets upward."""
    world = _nominal_world(speed=2.0)
    pipe = ActionPipeline()
    pipe.on_intervention(ActionKeys("FOLLOW_LANE", "ACCELERATE"), world)
    for _ in range(60):
        sig = pipe.tick(world)
        world = step(world, sig)
        refresh_derived(world)
    assert world.ego.speed > 5.0


def test_stop_hold_reaches_standstill():
    world = _nominal_world(speed=8.0)
    pipe = ActionPipeline()
    pipe.on_intervention(ActionKeys("FOLLOW_LANE", "STOP"), world)
    for _ in range(80):
        sig = pipe.tick(world)
        world = step(world, sig)
        refresh_derived(world)
    assert world.ego.speed < 0.2


def test_keep_converges_to_initial_speed():
    world = _nominal_world(speed=6.0)
    pipe = ActionPipeline()
    pipe.on_intervention(ActionKeys("FOLLOW_LANE", "KEEP"), world)
    speeds = []
    for _ in range(50):
        sig = pipe.tick(world)
        world = step(world, sig)
        refresh_derived(world)
        speeds.append(world.ego.speed)
    assert speeds[-1] == pytest.approx(6.0, abs=0.8)


# ---------- controllers ----------

def test_pedals_never_overlap():
    rng = random.Random(5)
    world = _nominal_world(speed=4.0)
    pipe = ActionPipeline()
    keys = [ActionKeys("FOLLOW_LANE", k) for k in SPEED_KEYS]
    for i in range(200):
        if i % 20 == 0:
            pipe.on_intervention(rng.choice(keys), world)
        sig = pipe.tick(world)
        assert sig.throttle * sig.brake == 0.0
        assert 0.0 <= sig.throttle <= 1.0 and 0.0 <= sig.brake <= 1.0
        assert -1.0 <= sig.steer <= 1.0
        world = step(world, sig)
        refresh_derived(world)


def test_slew_limits_pedal_rise():
    world = _nominal_world(speed=0.0)
    pipe = ActionPipeline()
    pipe.on_intervention(ActionKeys("FOLLOW_LANE", "ACCELERATE"), world)
    first = pipe.tick(world)
    assert first.throttle <= 0.12 + 1e-9
    world = step(world, first)
    refresh_derived(world)
    second = pipe.tick(world)
    assert second.throttle <= first.throttle + 0.12 + 1e-9


def test_steer_sign_left_is_negative():
    world = _nominal_world(speed=6.0)
    plan = plan_waypoints(ActionKeys("DEVIATE_LEFT", "KEEP"), world)
    from lanebench.action.pipeline import control
    sig = control(plan, world.ego)
    assert sig.steer < 0.0
    plan = plan_waypoints(ActionKeys("DEVIATE_RIGHT", "KEEP"), world)
    sig = control(plan, world.ego)
    assert sig.steer > 0.0


def test_deviate_settles_at_fixed_offset():
    world = _nominal_world(speed=6.0)
    pipe = ActionPipeline()
    for i in range(160):
        if i % 5 == 0:
            pipe.on_intervention(ActionKeys("DEVIATE_RIGHT", "KEEP"), world)
        sig = pipe.tick(world)
        world = step(world, sig)
        refresh_derived(world)
    off = project_to_polyline(world.ego.route, world.ego.pose.xy)[1]
    assert off == pytest.approx(DEVIATE_OFFSET, abs=0.25)
    assert off > 0.0  # right of the centerline


def test_change_without_neighbor_falls_back_with_warning():
    world = _nominal_world()  # follow_lead is a single-lane road
    pipe = ActionPipeline()
    plan = pipe.on_intervention(ActionKeys("CHANGE_LANE_RIGHT", "KEEP"), world)
    assert plan.direction == "FOLLOW_LANE"
    assert pipe.warnings and "no neighbor lane" in pipe.warnings[0]


def test_lane_change_reaches_neighbor_lane():
    world = load_scenario("obstacle_pass")
    refresh_derived(world)
    world.ego.speed = 6.0
    pipe = ActionPipeline()
    pipe.on_intervention(ActionKeys("CHANGE_LANE_LEFT", "KEEP"), world)
    for _ in range(70):
        sig = pipe.tick(world)
        world = step(world, sig)
        refresh_derived(world)
    assert world.ego.current_lane == "L1"


def test_expert_keys_drive_the_pipeline():
    """The pipeline accepts whatever the expert emits, across a whole run."""
    world = load_scenario("sign_corridor")
    refresh_derived(world)
    pipe = ActionPipeline()
    for i in range(150):
        if i % 5 == 0:
            pair = annotate_frame(world, [50])[0]
            keys = extract_keys(pair.gt_answer_text)
            assert keys.direction in DIRECTION_KEYS
            assert keys.speed in SPEED_KEYS
            pipe.on_intervention(resolve_defaults(keys, world), world)
        sig = pipe.tick(world)
        world = step(world, sig)
        refresh_derived(world)
    assert not pipe.warnings
