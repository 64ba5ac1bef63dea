import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import dijkstra8, euclid_to_set

from socnavmap.planner import (
    Action,
    NoPathError,
    ShortTermGoal,
    extract_stg,
    fmm_distance,
    goal_region,
    relative_angle,
    select_action,
    traversability,
)


def test_traversability_examples():
    empty = np.zeros((20, 20), dtype=bool)
    assert traversability(empty, 3).all()
    one = empty.copy()
    one[10, 10] = True
    assert (~traversability(one, 3)).sum() == 29
    assert not traversability(np.ones((5, 5), dtype=bool), 3).any()


def test_fmm_goal_zero_and_free_space_accuracy():
    free = np.ones((61, 61), dtype=bool)
    d = fmm_distance(free, [(30, 30)])
    assert d[30, 30] == 0.0
    e = euclid_to_set(free.shape, [(30, 30)])
    far = e >= 5
    assert np.all(d[far] >= e[far] - 1e-9)
    assert np.all(d[far] <= e[far] + 1.0)
    assert np.max((d[far] - e[far]) / e[far]) <= 0.08


def test_fmm_sealed_ring_unreachable():
    free = np.ones((21, 21), dtype=bool)
    free[5, 5:16] = free[15, 5:16] = free[5:16, 5] = free[5:16, 15] = False
    d = fmm_distance(free, [(0, 0)])
    assert np.all(np.isinf(d[6:15, 6:15]))
    assert np.isfinite(d[20, 20])


def test_fmm_goal_blocked_raises():
    free = np.ones((10, 10), dtype=bool)
    free[5, 5] = False
    with pytest.raises(NoPathError):
        fmm_distance(free, [(5, 5)])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fmm_bracket_random(seed):
    rng = np.random.default_rng(seed)
    free = rng.random((30, 30)) >= 0.1
    goal = tuple(int(v) for v in np.argwhere(free)[rng.integers(free.sum())])
    d = fmm_distance(free, [goal])
    dj = dijkstra8(free, [goal])
    e = euclid_to_set(free.shape, [goal])
    reach = np.isfinite(dj)
    assert np.array_equal(np.isfinite(d), reach)
    assert np.all(d[reach] >= e[reach] - 1e-9)
    assert np.all(d[reach] <= dj[reach] + 1e-9)


def test_early_stop_matches_full_solution_at_start():
    rng = np.random.default_rng(3)
    free = rng.random((50, 50)) >= 0.15
    free[0, 0] = free[49, 49] = True
    full = fmm_distance(free, [(0, 0)])
    part = fmm_distance(free, [(0, 0)], stop_at=(49, 49))
    assert part[49, 49] == full[49, 49]
    finite = np.isfinite(part)
    assert np.array_equal(part[finite], full[finite])


def test_stg_adjacent_goal():
    free = np.ones((20, 20), dtype=bool)
    d = fmm_distance(free, [(10, 11)])
    stg = extract_stg(d, (10, 10), 10)
    assert stg.valid and stg.point == (10.0, 11.0)


def test_stg_corridor():
    free = np.zeros((7, 60), dtype=bool)
    free[3, :] = True
    d = fmm_distance(free, [(3, 55)])
    stg = extract_stg(d, (3, 5), 10)
    assert stg.point == (3.0, 15.0)
    vals = [d[p] for p in stg.path]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_stg_invalid_in_sealed_room():
    free = np.ones((21, 21), dtype=bool)
    free[5, 5:16] = free[15, 5:16] = free[5:16, 5] = free[5:16, 15] = False
    d = fmm_distance(free, [(0, 0)])
    assert not extract_stg(d, (10, 10), 10).valid


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_stg_descent_and_safety(seed):
    rng = np.random.default_rng(seed)
    obstacles = rng.random((40, 40)) < 0.04
    free = traversability(obstacles, 1)
    cells = np.argwhere(free)
    if len(cells) < 2:
        return
    goal = tuple(cells[rng.integers(len(cells))])
    start = tuple(cells[rng.integers(len(cells))])
    d = fmm_distance(free, goal_region(free.shape, goal, 2) & free)
    if not np.isfinite(d[start]):
        return
    stg = extract_stg(d, start, 10)
    assert stg.valid
    vals = [d[p] for p in stg.path]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert all(free[p] for p in stg.path)


def test_relative_angle_and_actions():
    stg = ShortTermGoal((200.0, 210.0), True)
    # target along +col has bearing 0; a robot with map bearing 0 faces it
    assert relative_angle(0.0, (200, 200), stg.point) == 0.0
    assert select_action(0.0, (200, 200), stg, False) is Action.MOVE_FORWARD
    assert select_action(90.0, (200, 200), stg, False) is Action.TURN_RIGHT
    assert select_action(-90.0, (200, 200), stg, False) is Action.TURN_LEFT
    assert select_action(90.0, (200, 200), stg, True) is Action.STOP
    assert select_action(0.0, (200, 200), ShortTermGoal((0.0, 0.0), False), False) is Action.STOP


def test_threshold_inclusive():
    stg = ShortTermGoal((200.0, 210.0), True)
    assert select_action(15.0, (200, 200), stg, False) is Action.MOVE_FORWARD
    assert select_action(-15.0, (200, 200), stg, False) is Action.MOVE_FORWARD
    assert select_action(15.0001, (200, 200), stg, False) is Action.TURN_RIGHT
    assert select_action(-15.0001, (200, 200), stg, False) is Action.TURN_LEFT


@settings(max_examples=300, deadline=None)
@given(st.floats(-720, 720), st.floats(-50, 50), st.floats(-50, 50), st.integers(-3, 3))
def test_action_periodic_and_total(theta, dr, dc, k):
    if math.hypot(dr, dc) < 1e-3:
        return
    stg = ShortTermGoal((200 + dr, 200 + dc), True)
    a = select_action(theta, (200, 200), stg, False)
    assert a in (Action.MOVE_FORWARD, Action.TURN_LEFT, Action.TURN_RIGHT)
    rel = relative_angle(theta, (200, 200), stg.point)
    assert -180.0 < rel <= 180.0
    b = select_action(theta + 360.0 * k, (200, 200), stg, False)
    if abs(abs(rel) - 15.0) > 1e-6:
        assert a is b


def test_goal_region_disk_and_edges():
    assert goal_region((50, 50), (25, 25), 4).sum() == 49
    assert goal_region((50, 50), (0, 0), 4).sum() == 17
    assert not goal_region((10, 10), (-20, -20), 4).any()


def test_relative_angle_half_turn_is_positive():
    assert relative_angle(0.0, (0.0, 0.0), (9.363226577626399e-11, -11.0)) == 180.0
