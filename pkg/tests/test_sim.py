import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from socnavmap.planner import Action
from socnavmap.sim import (
    EpisodeTerminated,
    HumanAgent,
    Pose,
    RobotState,
    Scene,
    ScenarioError,
    Simulator,
    human_policy_step,
    initial_state,
    load_scenario,
    min_human_distance,
    observe_humans,
    parse_scenario,
    render_depth,
    robot_motion,
    step,
)

OPEN = Scene((-10, -10, 10, 10), np.zeros((0, 4)))


def room(walls=()):
    return Scene((-5, -5, 5, 5), np.array(walls, dtype=float).reshape(-1, 4))


def scenario(**over):
    d = {
        "scene": {"bounds": [-5, -5, 5, 5], "walls": []},
        "robot": {"start": [0, 0, 0]},
        "goal": [3, 0],
        "humans": [{"id": 0, "start": [0, 3, 0], "waypoints": [[3, 3], [-3, 3]], "pause_prob": 0.2}],
        "seed": 7,
    }
    d.update(over)
    return d


def test_forward_and_turns():
    r = RobotState(Pose(0.0, 0.0, 0.0))
    moved, blocked = robot_motion(OPEN, r, Action.MOVE_FORWARD)
    assert moved.pose.x == pytest.approx(0.25) and not blocked
    left, _ = robot_motion(OPEN, r, Action.TURN_LEFT)
    assert left.pose.heading == pytest.approx(math.radians(15))
    right, _ = robot_motion(OPEN, r, Action.TURN_RIGHT)
    assert right.pose.heading == pytest.approx(math.radians(-15))
    still, _ = robot_motion(OPEN, r, Action.STOP)
    assert still == r


def test_head_on_truncated():
    scene = room([[0.4, -2, 0.4, 2]])
    r, blocked = robot_motion(scene, RobotState(Pose(0.0, 0.0, 0.0)), Action.MOVE_FORWARD)
    assert blocked and r.pose.x == pytest.approx(0.15, abs=1e-6) and r.pose.y == pytest.approx(0.0, abs=1e-6)


def test_glancing_contact_slides():
    scene = room([[-2, 0.3, 2, 0.3]])
    heading = math.radians(30)
    r, blocked = robot_motion(scene, RobotState(Pose(0.0, 0.0, heading)), Action.MOVE_FORWARD)
    assert blocked
    assert r.pose.x > 0.25 * math.cos(heading) - 1e-9
    assert 0.3 - r.pose.y >= 0.25 - 1e-6
    plain, _ = robot_motion(scene, RobotState(Pose(0.0, 0.0, heading)), Action.MOVE_FORWARD, slide=False)
    assert r.pose.x > plain.pose.x


@settings(max_examples=150, deadline=None)
@given(st.floats(-math.pi, math.pi), st.integers(1, 30))
def test_robot_never_penetrates_walls(heading, n):
    scene = room([[1.0, -1.0, 1.0, 1.0], [-1.0, 1.0, 1.0, 1.0]])
    r = RobotState(Pose(0.0, 0.0, heading))
    for _ in range(n):
        r, _ = robot_motion(scene, r, Action.MOVE_FORWARD)
        assert scene.clearance(r.pose.x, r.pose.y) >= r.radius - 1e-6


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.8, 1.2), st.floats(0, 1))
def test_human_displacement_bounds(seed, speed, pause):
    rng = np.random.default_rng(seed)
    h = HumanAgent(0, Pose(0.0, 0.0, 0.0), ((3.0, 0.0), (3.0, 3.0), (0.0, 0.0)), speed, pause)
    for _ in range(40):
        nh = human_policy_step(h, rng, OPEN)
        d = float(np.hypot(*(nh.pose.xy - h.pose.xy)))
        assert d == 0.0 or 0.8 * 0.25 - 1e-9 <= d <= 1.2 * 0.25 + 1e-9
        h = nh


def test_human_respects_walls():
    scene = room([[1.0, -2.0, 1.0, 2.0]])
    h = HumanAgent(0, Pose(0.0, 0.0, 0.0), ((3.0, 0.0),))
    rng = np.random.default_rng(0)
    for _ in range(20):
        h = human_policy_step(h, rng, scene)
        assert scene.clearance(h.pose.x, h.pose.y) >= h.radius - 1e-9
    assert h.pose.x < 1.0


def test_min_human_distance_clamped():
    r = RobotState(Pose(0.0, 0.0, 0.0))
    assert min_human_distance(r, []) == math.inf
    assert min_human_distance(r, [HumanAgent(0, Pose(0.3, 0.0, 0.0))]) == 0.0
    assert min_human_distance(r, [HumanAgent(0, Pose(2.0, 0.0, 0.0))]) == pytest.approx(1.45)


def test_depth_wall_distance_and_range():
    scene = room([[2.0, -3.0, 2.0, 3.0]])
    depth = render_depth(scene, Pose(0.0, 0.0, 0.0))
    assert depth.data[128, 128] == pytest.approx(2.0, abs=1e-6)
    far = render_depth(OPEN, Pose(0.0, 0.0, 0.0))
    assert np.all(far.data == far.max_range)


def test_fov_observation_filters():
    r = RobotState(Pose(0.0, 0.0, 0.0))
    humans = [HumanAgent(0, Pose(2.0, 0.0, 0.0)), HumanAgent(1, Pose(-2.0, 0.0, 0.0)), HumanAgent(2, Pose(9.0, 0.0, 0.0))]
    assert len(observe_humans(OPEN, r, humans, "oracle")) == 3
    assert [o.id for o in observe_humans(OPEN, r, humans, "fov")] == [0]
    walled = room([[1.0, -1.0, 1.0, 1.0]])
    assert observe_humans(walled, r, humans[:1], "fov") == []
    with pytest.raises(ValueError):
        observe_humans(OPEN, r, humans, "xray")


def test_determinism_and_purity():
    spec = parse_scenario(scenario())
    actions = [Action.MOVE_FORWARD, Action.TURN_LEFT, Action.MOVE_FORWARD] * 10

    def run():
        state = initial_state(spec)
        poses = []
        for a in actions:
            state, _ = step(spec, state, a)
            poses.append((state.robot.pose, tuple(h.pose for h in state.humans)))
        return poses

    assert run() == run()
    s0 = initial_state(spec)
    a, _ = step(spec, s0, Action.MOVE_FORWARD)
    b, _ = step(spec, s0, Action.MOVE_FORWARD)
    assert a.humans == b.humans and s0.t == 0


def test_stop_terminates_and_hold_does_not():
    spec = parse_scenario(scenario(goal=[0.1, 0.0]))
    s, info = step(spec, initial_state(spec), Action.STOP, hold=True)
    assert not info.done and not info.success_candidate
    s, info = step(spec, s, Action.STOP)
    assert info.done and info.success_candidate
    with pytest.raises(EpisodeTerminated):
        step(spec, s, Action.MOVE_FORWARD)


def test_max_steps():
    spec = parse_scenario(scenario(max_steps=3))
    sim = Simulator(spec)
    sim.reset()
    infos = [sim.step(Action.TURN_LEFT)[1] for _ in range(3)]
    assert [i.done for i in infos] == [False, False, True] and infos[-1].reason == "max_steps"


def test_parse_collects_all_errors():
    bad = scenario(goal=[50, 0], robot={"start": [0, 0]}, seed="x")
    bad["humans"][0]["speed_factor"] = 3.0
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(bad)
    msg = str(exc.value)
    for part in ("robot.start", "goal outside", "seed", "speed_factor"):
        assert part in msg
    assert len(exc.value.errors) >= 4


def test_unreachable_goal_and_wall_start():
    sealed = scenario(goal=[3, 0])
    sealed["scene"]["walls"] = [[2, -5, 2, 5]]
    with pytest.raises(ScenarioError, match="unreachable"):
        parse_scenario(sealed)
    inside = scenario()
    inside["scene"]["walls"] = [[0.1, -1, 0.1, 1]]
    with pytest.raises(ScenarioError, match="intersects"):
        parse_scenario(inside)


def test_load_scenario_files(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_scenario(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ScenarioError, match="parse error"):
        load_scenario(broken)
    good = tmp_path / "ok.json"
    good.write_text(json.dumps(scenario()))
    spec = load_scenario(good)
    assert spec.name == "ok" and spec.shortest_path == pytest.approx(3.0, abs=0.15)
