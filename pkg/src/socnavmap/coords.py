"""World, simulator and map frames.

World positions follow the y-up convention ``(x, y, z)`` with the floor in
the x-z plane. ``world_to_sim`` maps them to a right-handed floor frame
``(-z, -x, y)``; the episode simulator works directly in that floor frame,
so :func:`floor_to_world` is its inverse on the floor plane.

Map points are continuous ``(row, col)`` cell coordinates whose integer
values are cell centres. The agent's initial position is pinned to the grid
centre for the whole episode.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

CLAMP_MARGIN_LOW = 3
CLAMP_MARGIN_HIGH = 4


def world_to_sim(p) -> np.ndarray:
    """``(x, y, z) -> (-z, -x, y)``; accepts a 3-vector or an ``(N, 3)`` array."""
    p = np.asarray(p, dtype=float)
    return np.stack([-p[..., 2], -p[..., 0], p[..., 1]], axis=-1)


def floor_to_world(x, y, height=0.0) -> np.ndarray:
    """Floor-frame position (metres) to a y-up world position."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return np.stack([-y, np.full_like(x, height), -x], axis=-1)


def to_cell(point) -> tuple[int, int]:
    return int(math.floor(point[0] + 0.5)), int(math.floor(point[1] + 0.5))


@dataclass(frozen=True)
class MapFrame:
    """Fixed map frame anchored at the agent's initial world position."""

    p_init: tuple[float, float, float]
    shape: tuple[int, int] = (400, 400)
    resolution: float = 0.05

    @property
    def map_center(self) -> tuple[float, float]:
        return (self.shape[0] / 2.0, self.shape[1] / 2.0)

    def to_map(self, p) -> np.ndarray:
        """World position(s) to continuous map coordinates."""
        delta = world_to_sim(p) - world_to_sim(self.p_init)
        center = np.asarray(self.map_center)
        offset = np.stack([-delta[..., 0], delta[..., 1]], axis=-1) / self.resolution
        return center + offset

    def floor_to_map(self, x, y) -> np.ndarray:
        return self.to_map(floor_to_world(x, y))

    def map_to_floor(self, rows, cols) -> tuple[np.ndarray, np.ndarray]:
        """Inverse of :meth:`floor_to_map` on the floor plane."""
        x0, y0 = -self.p_init[2], -self.p_init[0]
        rows = np.asarray(rows, dtype=float)
        cols = np.asarray(cols, dtype=float)
        x = x0 - (rows - self.map_center[0]) * self.resolution
        y = y0 + (cols - self.map_center[1]) * self.resolution
        return x, y

    def contains(self, point) -> bool:
        r, c = point
        return -0.5 <= r < self.shape[0] - 0.5 and -0.5 <= c < self.shape[1] - 0.5

    def as_dict(self) -> dict:
        return {
            "p_init": [float(v) for v in self.p_init],
            "shape": list(self.shape),
            "resolution": self.resolution,
            "map_center": list(self.map_center),
        }


def goal_to_map(g, frame: MapFrame) -> np.ndarray:
    """Goal world position to map coordinates through the simulator-frame offset."""
    return frame.to_map(g)


def human_to_map(h, frame: MapFrame) -> np.ndarray:
    """Human world position(s) to map coordinates; same transform as goals."""
    return frame.to_map(h)


def robot_heading_to_map(heading: float) -> float:
    """Floor-frame heading (rad, CCW from +x) to the map bearing in degrees.

    Map bearings are measured as ``atan2(d_row, d_col)``; a floor heading
    psi corresponds to ``psi - 90`` degrees.
    """
    return math.degrees(heading) - 90.0


def human_heading_to_map(heading: float) -> float:
    """Floor-frame heading to the orientation angle used by the heading predictor.

    The predictor steps along ``(cos(theta + pi/2), -sin(theta + pi/2))`` in
    ``(row, col)``, which matches floor motion ``(cos psi, sin psi)`` when
    ``theta = psi + pi/2``.
    """
    return heading + math.pi / 2.0


def clamp_to_map(point, shape) -> np.ndarray:
    point = np.asarray(point, dtype=float)
    hi = np.asarray(shape, dtype=float) - CLAMP_MARGIN_HIGH
    return np.clip(point, CLAMP_MARGIN_LOW, hi)


def intermediate_goal(agent, goal, local_shape, map_shape=None) -> np.ndarray:
    """Place a target ``min(W/3, H/3)`` cells from ``agent`` toward ``goal``.

    The result is clamped per axis to ``[3, size - 4]`` of ``map_shape``
    (defaults to ``local_shape``). If agent and goal coincide the agent
    position is returned and a warning is logged.
    """
    agent = np.asarray(agent, dtype=float)
    goal = np.asarray(goal, dtype=float)
    map_shape = local_shape if map_shape is None else map_shape
    d = min(local_shape[1] / 3.0, local_shape[0] / 3.0)
    direction = goal - agent
    norm = float(np.hypot(*direction))
    if norm == 0.0:
        logger.warning("intermediate goal requested with agent == goal at %s", agent.tolist())
        return agent.copy()
    return clamp_to_map(agent + direction / norm * d, map_shape)
