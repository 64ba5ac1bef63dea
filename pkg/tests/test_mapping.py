import math

import numpy as np
import pytest
from oracles import pinhole_backproject

from socnavmap.coords import MapFrame, floor_to_world
from socnavmap.mapping import (
    MapBuilder,
    PointCloud,
    VoxelBounds,
    VoxelGrid,
    camera_to_agent,
    center_view,
    depth_to_pointcloud,
    normalize,
    project_to_2d,
    voxelize,
)
from socnavmap.sim import Camera, DepthImage, Pose, Scene, render_depth


def depth_image(data, f=2.0, c=1.5, max_range=10.0):
    return DepthImage(np.asarray(data, dtype=float), f, f, c, c, max_range)


def test_backprojection_matches_pinhole():
    rng = np.random.default_rng(0)
    data = rng.uniform(0.5, 5.0, size=(4, 4))
    cloud = depth_to_pointcloud(depth_image(data))
    v, u = np.nonzero(np.ones((4, 4), dtype=bool))
    expect = np.array([pinhole_backproject(data[j, i], 2.0, 2.0, 1.5, 1.5, i, j) for j, i in zip(v, u)])
    assert np.allclose(cloud.points, expect)


def test_backprojection_drops_sentinels():
    data = np.array([[1.0, 0.0], [10.0, np.nan]])
    cloud = depth_to_pointcloud(depth_image(data, c=0.5))
    assert len(cloud) == 1


def test_camera_to_agent_identity_rotation():
    pts = np.array([[1.0, 2.0, 3.0]])
    out = camera_to_agent(PointCloud(pts, "camera"), 0.88, 0.0)
    assert np.allclose(out.points, [[1.0, 2.0, 3.88]])


def test_level_camera_axes():
    # optical axis (0, 0, d) should land straight ahead at camera height
    out = camera_to_agent(PointCloud(np.array([[0.0, 0.0, 2.0], [0.0, 1.0, 2.0]]), "camera"), 0.88, -math.pi / 2)
    assert np.allclose(out.points[0], [0.0, 2.0, 0.88])
    # image "down" lowers the point
    assert out.points[1][2] == pytest.approx(0.88 - 1.0)


def test_center_view_shift():
    out = center_view(PointCloud(np.array([[0.0, 1.0, 0.5]]), "agent"), 100, 0.05)
    assert np.allclose(out.points, [[2.5 - 1.0, 0.0, 0.5]])


def test_normalize_corners_and_center():
    b = VoxelBounds((-1.0, 0.0, 0.0), (2.0, 4.0, 2.0), 0.5)
    assert np.allclose(normalize(np.array([b.origin]), b), -1.0)
    assert np.allclose(normalize(np.array([b.center]), b), 0.0)
    top = np.array(b.origin) + np.array(b.extent)
    assert np.allclose(normalize(top[None], b), 1.0)


def test_voxelize_counts_and_drops():
    b = VoxelBounds((0.0, 0.0, 0.0), (1.0, 1.0, 1.0), 0.5)
    pts = np.array([[0.1, 0.1, 0.1], [0.2, 0.2, 0.2], [0.9, 0.1, 0.6], [2.0, 0.0, 0.0], [-0.1, 0.5, 0.5]])
    vox = voxelize(PointCloud(pts, "centered"), b)
    assert vox.counts.shape == (2, 2, 2)
    assert vox.counts[0, 0, 0] == 2 and vox.counts[1, 0, 1] == 1 and vox.counts.sum() == 3


def test_height_band():
    b = VoxelBounds((0.0, 0.0, 0.0), (0.1, 0.1, 2.0), 0.05)
    counts = np.zeros((2, 2, 40), dtype=int)
    counts[0, 0, 1] = 5  # 0.05-0.10 m: floor clutter, ignored
    counts[1, 1, 10] = 1  # 0.50 m
    counts[0, 1, 35] = 3  # 1.75 m: above band
    occ = project_to_2d(VoxelGrid(counts, b), 0.2, 1.5)
    assert occ.tolist() == [[False, False], [False, True]]
    with pytest.raises(ValueError):
        project_to_2d(VoxelGrid(counts, b), 1.0, 1.0)


def wall_cells(builder):
    return np.argwhere(builder.grid.static)


def test_wall_lands_where_expected():
    scene = Scene((-5, -5, 5, 5), np.array([[2.0, -1.0, 2.0, 1.0]]))
    pose = Pose(0.0, 0.0, 0.0)
    frame = MapFrame(tuple(floor_to_world(0.0, 0.0)))
    mb = MapBuilder(frame)
    mb.update(render_depth(scene, pose, Camera()), pose)
    cells = wall_cells(mb)
    assert set(cells[:, 0]) == {160}
    assert cells[:, 1].min() == 180 and cells[:, 1].max() == 220
    # second view from elsewhere must agree within two cells
    pose2 = Pose(0.3, -0.4, math.radians(30))
    mb.update(render_depth(scene, pose2, Camera()), pose2)
    cells = wall_cells(mb)
    assert cells[:, 0].min() >= 158 and cells[:, 0].max() <= 162


def test_explored_and_humans_masked():
    scene = Scene((-5, -5, 5, 5), np.zeros((0, 4)))
    frame = MapFrame(tuple(floor_to_world(0.0, 0.0)))
    mb = MapBuilder(frame)
    from socnavmap.sim import HumanAgent

    human = HumanAgent(0, Pose(2.0, 0.0, 0.0))
    pose = Pose(0.0, 0.0, 0.0)
    depth = render_depth(scene, pose, Camera(), [human])
    mb.update(depth, pose, [(2.0, 0.0)])
    assert not mb.grid.static.any()
    assert mb.grid.explored[170, 200] and not mb.grid.explored[230, 200]
    unmasked = MapBuilder(frame)
    unmasked.update(depth, pose)
    assert unmasked.grid.static.any()
