import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from socnavmap.obstacles import (
    DynamicObstacleLayer,
    compose,
    disk,
    expire,
    human_radius_pixels,
    rasterize,
)


def lattice_disk(center, r, shape):
    """Brute-force enumeration of cell centres within ``r`` of ``center`` (inclusive, 1e-9 slack)."""
    return {
        (i, j)
        for i, j in itertools.product(range(shape[0]), range(shape[1]))
        if (i - center[0]) ** 2 + (j - center[1]) ** 2 <= r * r + 1e-9
    }


def stamped_set(layer):
    return set(zip(*map(list, np.nonzero(layer.stamped))))


def test_radius_formula():
    assert human_radius_pixels(0.25, 0.05) == pytest.approx(5.0)
    assert human_radius_pixels(0.5, 0.05) == pytest.approx(10.0)


def test_single_center_81_cells():
    layer = rasterize(DynamicObstacleLayer((40, 40), r_pixels=5.0), [(20, 20)], t=0)
    assert layer.stamped.sum() == 81
    assert stamped_set(layer) == lattice_disk((20, 20), 5, (40, 40))


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 29), st.floats(0, 29), st.floats(0, 6))
def test_disk_matches_brute_force(r, c, rad):
    layer = rasterize(DynamicObstacleLayer((30, 30), r_pixels=rad), [(r, c)], t=1)
    expected = lattice_disk((r, c), rad, (30, 30))
    expected.add((int(np.floor(r + 0.5)), int(np.floor(c + 0.5))))
    assert stamped_set(layer) == {p for p in expected if 0 <= p[0] < 30 and 0 <= p[1] < 30}


def test_zero_radius_center_only():
    layer = rasterize(DynamicObstacleLayer((10, 10), r_pixels=0.0), [(4, 6)], t=0)
    assert stamped_set(layer) == {(4, 6)}


def test_restamp_refreshes():
    layer = DynamicObstacleLayer((10, 10), r_pixels=1.0)
    rasterize(layer, [(5, 5)], t=3)
    rasterize(layer, [(5, 5)], t=4)
    assert layer.stamps[5, 5] == 4


def test_out_of_grid_skipped_and_nonfinite_rejected():
    layer = rasterize(DynamicObstacleLayer((10, 10), r_pixels=2.0), [(-1, 0)], t=0)
    assert stamped_set(layer) == lattice_disk((-1, 0), 2, (10, 10))
    with pytest.raises(ValueError):
        rasterize(layer, [(np.nan, 1.0)], t=0)


def test_decay_boundary():
    layer = rasterize(DynamicObstacleLayer((10, 10), r_pixels=1.0, t_decay=5), [(5, 5)], t=0)
    kept, cleared = expire(layer.copy(), 5)
    assert kept.stamped.sum() == 5 and not cleared.any()
    kept, cleared = expire(layer.copy(), 6)
    assert not kept.stamped.any() and cleared.sum() == 5


def test_expire_empty_and_idempotent():
    layer, cleared = expire(DynamicObstacleLayer((5, 5)), 100)
    assert not layer.stamped.any() and not cleared.any()
    layer = rasterize(DynamicObstacleLayer((10, 10), r_pixels=2.0), [(3, 3)], t=0)
    rasterize(layer, [(7, 7)], t=4)
    once, _ = expire(layer.copy(), 8)
    twice, again = expire(once.copy(), 8)
    assert np.array_equal(once.stamps, twice.stamps) and not again.any()


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 1000), st.integers(0, 20), st.integers(0, 10))
def test_decay_property(t0, dt, t_decay):
    layer = rasterize(DynamicObstacleLayer((8, 8), r_pixels=0.0, t_decay=t_decay), [(4, 4)], t=t0)
    assert layer.active(t0 + dt)[4, 4] == (dt <= t_decay)
    kept, cleared = expire(layer, t0 + dt)
    assert bool(cleared[4, 4]) == (dt > t_decay)


def test_compose_static_precedence():
    static = np.zeros((10, 10), dtype=bool)
    static[2, 2] = True
    layer = rasterize(DynamicObstacleLayer((10, 10), r_pixels=0.0, t_decay=5), [(2, 2), (7, 7)], t=0)
    assert compose(static, layer, 0)[2, 2] and compose(static, layer, 0)[7, 7]
    expire(layer, 6)
    combined = compose(static, layer, 6)
    assert combined[2, 2] and not combined[7, 7]
    assert np.array_equal(compose(static, DynamicObstacleLayer((10, 10)), 0), static)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 12))
def test_compose_never_clears_static(seed, t):
    rng = np.random.default_rng(seed)
    static = rng.random((12, 12)) < 0.3
    layer = DynamicObstacleLayer((12, 12), r_pixels=1.5, t_decay=3)
    for k in range(5):
        rasterize(layer, rng.uniform(0, 12, size=(2, 2)), t=k)
    expire(layer, t)
    assert np.all(compose(static, layer, t)[static])


def test_disk_element():
    assert disk(5).sum() == 81
    assert disk(3).sum() == 29
    assert disk(0).sum() == 1
