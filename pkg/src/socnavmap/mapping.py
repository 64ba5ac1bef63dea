"""Depth images to a persistent 2D occupancy grid.

The chain is: back-projection through the intrinsics, camera-to-agent
transform (x right, y forward, z up), re-centering of the view, voxel
binning at map resolution, and a height-band projection to a local patch
that is finally written into the episode's global grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coords import MapFrame


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    frame: str

    def __len__(self):
        return len(self.points)


def rot_x(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_z(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def depth_to_pointcloud(depth) -> PointCloud:
    """Back-project every non-sentinel pixel: ``K^-1 [u*D, v*D, D]``."""
    D = np.asarray(depth.data, dtype=float)
    valid = np.isfinite(D) & (D > 0.0) & (D < depth.max_range)
    v, u = np.nonzero(valid)
    d = D[v, u]
    pix = np.stack([u * d, v * d, d])
    pts = np.linalg.solve(depth.K, pix).T
    return PointCloud(pts, "camera")


def camera_to_agent(cloud: PointCloud, h_agent: float, x_angle: float) -> PointCloud:
    """``R_x(x_angle) @ P + [0, 0, h_agent]``."""
    pts = cloud.points @ rot_x(x_angle).T + np.array([0.0, 0.0, h_agent])
    return PointCloud(pts, "agent")


def center_view(cloud: PointCloud, vision_range: int = 100, resolution: float = 0.05) -> PointCloud:
    """Shift by ``s = [r*res/2, 0, pi/2]``: rotate about z by ``s[2]``, translate by ``(s[0], s[1])``."""
    s = (vision_range * resolution / 2.0, 0.0, math.pi / 2.0)
    pts = cloud.points @ rot_z(s[2]).T + np.array([s[0], s[1], 0.0])
    return PointCloud(pts, "centered")


@dataclass(frozen=True)
class VoxelBounds:
    """Axis-aligned voxel box: ``origin`` is the low corner, ``extent`` the side lengths."""

    origin: tuple[float, float, float]
    extent: tuple[float, float, float]
    resolution: float = 0.05

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(int(round(e / self.resolution)) for e in self.extent)

    @property
    def center(self) -> tuple[float, float, float]:
        return tuple(o + e / 2.0 for o, e in zip(self.origin, self.extent))

    @classmethod
    def around_agent(cls, vision_range: int = 100, resolution: float = 0.05, z_top: float = 2.0) -> "VoxelBounds":
        """Square patch of side ``2 * vision_range`` cells centred on the re-centred agent."""
        half = vision_range * resolution
        ax = vision_range * resolution / 2.0
        return cls((ax - half, -half, 0.0), (2 * half, 2 * half, z_top), resolution)


@dataclass(frozen=True)
class VoxelGrid:
    counts: np.ndarray
    bounds: VoxelBounds


def normalize(points: np.ndarray, bounds: VoxelBounds) -> np.ndarray:
    """Map the box to ``[-1, 1]`` per axis: ``2 * (P - origin) / extent - 1``."""
    return 2.0 * (points - np.asarray(bounds.origin)) / np.asarray(bounds.extent) - 1.0


def voxelize(cloud: PointCloud, bounds: VoxelBounds) -> VoxelGrid:
    """Bin points at map resolution; points outside the box are dropped."""
    shape = np.asarray(bounds.shape)
    norm = normalize(cloud.points, bounds)
    idx = np.floor((norm + 1.0) / 2.0 * shape).astype(np.int64)
    keep = np.all((norm >= -1.0) & (idx >= 0) & (idx < shape), axis=1)
    flat = np.ravel_multi_index(idx[keep].T, tuple(shape))
    counts = np.bincount(flat, minlength=int(np.prod(shape))).reshape(tuple(shape))
    return VoxelGrid(counts, bounds)


def project_to_2d(vox: VoxelGrid, z_min: float = 0.2, z_max: float = 1.5, threshold: int = 1) -> np.ndarray:
    """Sum the voxel layers lying inside ``[z_min, z_max]``; occupied where the sum reaches ``threshold``."""
    if not z_min < z_max:
        raise ValueError(f"z_min ({z_min}) must be below z_max ({z_max})")
    res = vox.bounds.resolution
    nz = vox.counts.shape[2]
    lo = vox.bounds.origin[2] + np.arange(nz) * res
    layers = (lo >= z_min - 1e-9) & (lo + res <= z_max + 1e-9)
    return vox.counts[:, :, layers].sum(axis=2) >= threshold


@dataclass
class OccupancyGrid:
    frame: MapFrame
    static: np.ndarray = field(default=None, repr=False)
    explored: np.ndarray = field(default=None, repr=False)
    clipped: int = 0

    def __post_init__(self):
        if self.static is None:
            self.static = np.zeros(self.frame.shape, dtype=bool)
        if self.explored is None:
            self.explored = np.zeros(self.frame.shape, dtype=bool)

    @property
    def shape(self) -> tuple[int, int]:
        return self.frame.shape


def patch_to_floor(bounds: VoxelBounds, vision_range: int, pose, ii, jj):
    """Floor positions of re-centred patch cells ``(ii, jj)`` for an agent at ``pose``."""
    res = bounds.resolution
    xc = bounds.origin[0] + (np.asarray(ii) + 0.5) * res
    yc = bounds.origin[1] + (np.asarray(jj) + 0.5) * res
    right = yc
    fwd = vision_range * res / 2.0 - xc
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    return pose.x + fwd * c + right * s, pose.y + fwd * s - right * c


def integrate(
    grid: OccupancyGrid,
    patch: np.ndarray,
    pose,
    bounds: VoxelBounds | None = None,
    vision_range: int = 100,
    hfov_deg: float = 90.0,
) -> OccupancyGrid:
    """OR a local obstacle patch into the global grid and mark the view footprint explored."""
    bounds = bounds or VoxelBounds.around_agent(vision_range, grid.frame.resolution)
    frame = grid.frame
    h, w = grid.shape
    ii, jj = np.nonzero(patch)
    if len(ii):
        x, y = patch_to_floor(bounds, vision_range, pose, ii, jj)
        cells = np.floor(frame.floor_to_map(x, y) + 0.5).astype(np.int64)
        inside = (cells[:, 0] >= 0) & (cells[:, 0] < h) & (cells[:, 1] >= 0) & (cells[:, 1] < w)
        grid.clipped += int((~inside).sum())
        grid.static[cells[inside, 0], cells[inside, 1]] = True
    grid.explored |= view_footprint(frame, pose, vision_range * frame.resolution, hfov_deg)
    return grid


def view_footprint(frame: MapFrame, pose, max_dist: float, hfov_deg: float) -> np.ndarray:
    """Grid cells inside the horizontal viewing wedge of the camera."""
    h, w = frame.shape
    center = frame.floor_to_map(pose.x, pose.y)
    k = int(math.ceil(max_dist / frame.resolution)) + 1
    r0, r1 = max(int(center[0]) - k, 0), min(int(center[0]) + k + 1, h)
    c0, c1 = max(int(center[1]) - k, 0), min(int(center[1]) + k + 1, w)
    out = np.zeros(frame.shape, dtype=bool)
    if r0 >= r1 or c0 >= c1:
        return out
    rr, cc = np.mgrid[r0:r1, c0:c1]
    x, y = frame.map_to_floor(rr, cc)
    dx, dy = x - pose.x, y - pose.y
    fwd = dx * math.cos(pose.heading) + dy * math.sin(pose.heading)
    right = dx * math.sin(pose.heading) - dy * math.cos(pose.heading)
    half = math.radians(hfov_deg) / 2.0
    inside = (fwd > 0.0) & (np.hypot(fwd, right) <= max_dist) & (np.abs(np.arctan2(right, fwd)) <= half)
    out[r0:r1, c0:c1] = inside
    return out


def remove_near(cloud: PointCloud, centers, radius: float) -> PointCloud:
    """Drop points whose horizontal (x, y) distance to any centre is below ``radius``."""
    if len(cloud) == 0 or len(centers) == 0:
        return cloud
    keep = np.ones(len(cloud), dtype=bool)
    for cx, cy in centers:
        keep &= np.hypot(cloud.points[:, 0] - cx, cloud.points[:, 1] - cy) >= radius
    return PointCloud(cloud.points[keep], cloud.frame)


@dataclass
class MapBuilder:
    """Runs the full depth-to-grid chain for one episode."""

    frame: MapFrame
    h_agent: float = 0.88
    camera_tilt: float = 0.0
    vision_range: int = 100
    z_min: float = 0.2
    z_max: float = 1.5
    hfov_deg: float = 90.0
    human_mask_radius: float = 0.45
    grid: OccupancyGrid = field(default=None)

    def __post_init__(self):
        if self.grid is None:
            self.grid = OccupancyGrid(self.frame)
        self.bounds = VoxelBounds.around_agent(self.vision_range, self.frame.resolution)

    def local_patch(self, depth, pose=None, humans_xy=()) -> np.ndarray:
        cloud = depth_to_pointcloud(depth)
        # the x-rotation that takes optical axes to the z-up agent frame
        agent = camera_to_agent(cloud, self.h_agent, self.camera_tilt - math.pi / 2.0)
        if pose is not None and len(humans_xy):
            agent = remove_near(agent, _to_agent_xy(pose, humans_xy), self.human_mask_radius)
        centered = center_view(agent, self.vision_range, self.frame.resolution)
        return project_to_2d(voxelize(centered, self.bounds), self.z_min, self.z_max)

    def update(self, depth, pose, humans_xy=()) -> np.ndarray:
        patch = self.local_patch(depth, pose, humans_xy)
        integrate(self.grid, patch, pose, self.bounds, self.vision_range, self.hfov_deg)
        return patch


def _to_agent_xy(pose, points) -> np.ndarray:
    """Floor positions to agent-frame ``(right, forward)``."""
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    dx, dy = p[:, 0] - pose.x, p[:, 1] - pose.y
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    return np.stack([dx * s - dy * c, dx * c + dy * s], axis=1)
