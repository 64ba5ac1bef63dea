"""Traversability, Fast Marching distance fields, short-term goals and actions."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit
from scipy import ndimage

from .coords import to_cell
from .obstacles import disk

SQRT2 = math.sqrt(2.0)
_INV_SQRT2 = 1.0 / SQRT2

ACTION_THRESHOLD_DEG = 15.0


class Action(str, Enum):
    MOVE_FORWARD = "move_forward"
    TURN_LEFT = "turn_left"
    TURN_RIGHT = "turn_right"
    STOP = "stop"


class NoPathError(ValueError):
    """Raised when the goal region has no traversable cell."""


@dataclass(frozen=True)
class ShortTermGoal:
    point: tuple[float, float]
    valid: bool
    path: tuple[tuple[int, int], ...] = ()


def traversability(obstacles: np.ndarray, robot_radius: float = 3) -> np.ndarray:
    """Return the boolean traversable mask ``~dilate(obstacles, disk(robot_radius))``."""
    obstacles = np.asarray(obstacles, dtype=bool)
    if robot_radius <= 0 or not obstacles.any():
        return ~obstacles
    return ~ndimage.binary_dilation(obstacles, structure=disk(robot_radius))


# Neighbour offsets: the four axis directions, each paired with its two diagonals.
_AXIS = np.array([[-1, 0], [1, 0], [0, -1], [0, 1]], dtype=np.int64)
_PERP = np.array([[[0, -1], [0, 1]], [[0, -1], [0, 1]], [[-1, 0], [1, 0]], [[-1, 0], [1, 0]]], dtype=np.int64)


@njit(cache=True)
def _local_update(dist, frozen, i, j, axis, perp):
    h, w = dist.shape
    best = dist[i, j]
    for a in range(4):
        ai = i + axis[a, 0]
        aj = j + axis[a, 1]
        ua = np.inf
        if 0 <= ai < h and 0 <= aj < w and frozen[ai, aj]:
            ua = dist[ai, aj]
            if ua + 1.0 < best:
                best = ua + 1.0
        for p in range(2):
            di = ai + perp[a, p, 0]
            dj = aj + perp[a, p, 1]
            if not (0 <= di < h and 0 <= dj < w) or not frozen[di, dj]:
                continue
            ud = dist[di, dj]
            if ud + SQRT2 < best:
                best = ud + SQRT2
            if ua < np.inf:
                # minimiser over the edge between the axis and diagonal neighbour
                delta = ua - ud
                if 0.0 <= delta <= _INV_SQRT2:
                    v = ua + math.sqrt(1.0 - delta * delta)
                    if v < best:
                        best = v
    return best


@njit(cache=True)
def _march(free, dist, stop_flat, axis, perp):
    h, w = dist.shape
    frozen = np.zeros((h, w), dtype=np.bool_)
    heap = [(0.0, np.int64(0))]
    heap.pop()
    for i in range(h):
        for j in range(w):
            if dist[i, j] == 0.0:
                heap.append((0.0, np.int64(i * w + j)))
    heapq.heapify(heap)
    while len(heap) > 0:
        d, idx = heapq.heappop(heap)
        i = idx // w
        j = idx % w
        if frozen[i, j] or d > dist[i, j]:
            continue
        frozen[i, j] = True
        if idx == stop_flat:
            break
        for di in range(-1, 2):
            for dj in range(-1, 2):
                ni = i + di
                nj = j + dj
                if (di == 0 and dj == 0) or not (0 <= ni < h and 0 <= nj < w):
                    continue
                if not free[ni, nj] or frozen[ni, nj]:
                    continue
                v = _local_update(dist, frozen, ni, nj, axis, perp)
                if v < dist[ni, nj]:
                    dist[ni, nj] = v
                    heapq.heappush(heap, (v, np.int64(ni * w + nj)))
    for i in range(h):
        for j in range(w):
            if not frozen[i, j]:
                dist[i, j] = np.inf
    return dist


def fmm_distance(traversable: np.ndarray, goal, stop_at: tuple[int, int] | None = None) -> np.ndarray:
    """Solve the unit-speed Eikonal equation on ``traversable`` from a goal set.

    The solver is a first-order Fast Marching scheme on the 8-neighbour
    stencil: each tentative value is the minimum over the eight triangles
    (axis neighbour, diagonal neighbour) of the linearly interpolated
    arrival time plus the straight travel cost. Values are in cell units.

    Args:
        traversable: boolean grid, True where motion is allowed.
        goal: boolean mask of goal cells, or an iterable of ``(row, col)``.
        stop_at: optional cell; marching halts once it is accepted. Cells not
            accepted by then are reported as ``inf``.

    Returns:
        Float array of travel cost, ``0`` on goal cells and ``inf`` where
        blocked or unreachable.

    Raises:
        NoPathError: no goal cell is traversable.
    """
    free = np.ascontiguousarray(traversable, dtype=np.bool_)
    goal_mask = _as_mask(goal, free.shape) & free
    if not goal_mask.any():
        raise NoPathError("no valid path: goal region is not traversable")
    dist = np.full(free.shape, np.inf)
    dist[goal_mask] = 0.0
    stop_flat = -1
    if stop_at is not None:
        r, c = stop_at
        if 0 <= r < free.shape[0] and 0 <= c < free.shape[1]:
            stop_flat = int(r) * free.shape[1] + int(c)
    return _march(free, dist, np.int64(stop_flat), _AXIS, _PERP)


def _as_mask(goal, shape) -> np.ndarray:
    if isinstance(goal, np.ndarray) and goal.dtype == bool and goal.shape == shape:
        return goal.copy()
    mask = np.zeros(shape, dtype=bool)
    for r, c in goal:
        r, c = int(r), int(c)
        if 0 <= r < shape[0] and 0 <= c < shape[1]:
            mask[r, c] = True
    return mask


def goal_region(shape, goal_cell: tuple[int, int], radius: float = 4) -> np.ndarray:
    """Disk-shaped multi-goal target around ``goal_cell``."""
    mask = np.zeros(shape, dtype=bool)
    se = disk(radius)
    k = se.shape[0] // 2
    r, c = goal_cell
    r0, r1 = max(r - k, 0), min(r + k + 1, shape[0])
    c0, c1 = max(c - k, 0), min(c + k + 1, shape[1])
    if r0 >= r1 or c0 >= c1:
        return mask
    mask[r0:r1, c0:c1] = se[r0 - (r - k): r1 - (r - k), c0 - (c - k): c1 - (c - k)]
    return mask


_NEIGHBOURS = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


def extract_stg(
    dist: np.ndarray,
    start: tuple[float, float],
    lookahead: float = 10,
    heading: tuple[float, float] | None = None,
) -> ShortTermGoal:
    """Trace steepest descent on ``dist`` from ``start`` for ``lookahead`` cells.

    ``heading`` (row, col direction) seeds the tie-break between equally
    steep neighbours; later ties prefer the smallest change of direction.
    """
    h, w = dist.shape
    r, c = to_cell(start)
    if not (0 <= r < h and 0 <= c < w) or not np.isfinite(dist[r, c]):
        return ShortTermGoal(point=(float(start[0]), float(start[1])), valid=False)
    path = [(r, c)]
    travelled = 0.0
    prev = None if heading is None else np.asarray(heading, dtype=float)
    while dist[r, c] > 0.0 and travelled < lookahead:
        best = None
        best_key = None
        for dr, dc in _NEIGHBOURS:
            nr, nc = r + dr, c + dc
            if not (0 <= nr < h and 0 <= nc < w):
                continue
            dn = dist[nr, nc]
            if not dn < dist[r, c]:
                continue
            step = SQRT2 if dr and dc else 1.0
            slope = (dist[r, c] - dn) / step
            turn = 0.0
            if prev is not None and np.any(prev):
                cosang = (prev[0] * dr + prev[1] * dc) / (np.hypot(*prev) * step)
                turn = -cosang
            key = (-round(slope, 9), turn)
            if best_key is None or key < best_key:
                best, best_key = (nr, nc, step), key
        if best is None:
            break
        nr, nc, step = best
        prev = np.array([nr - r, nc - c], dtype=float)
        r, c = nr, nc
        travelled += step
        path.append((r, c))
    return ShortTermGoal(point=(float(r), float(c)), valid=True, path=tuple(path))


def relative_angle(robot_heading_deg: float, robot: tuple[float, float], target: tuple[float, float]) -> float:
    """Heading error to ``target`` in degrees, re-centred to (-180, 180]."""
    bearing = math.degrees(math.atan2(target[0] - robot[0], target[1] - robot[1]))
    # round before wrapping so exact thresholds (e.g. 15.0) survive atan2
    # round-off and -180 cannot appear
    rel = round((robot_heading_deg - bearing) % 360.0, 9)
    if rel > 180.0:
        rel -= 360.0
    return rel


def select_action(
    robot_heading_deg: float,
    robot: tuple[float, float],
    stg: ShortTermGoal,
    at_goal: bool,
    threshold_deg: float = ACTION_THRESHOLD_DEG,
) -> Action:
    """Map the relative angle to the short-term goal onto a discrete action."""
    if at_goal or not stg.valid:
        return Action.STOP
    rel = relative_angle(robot_heading_deg, robot, stg.point)
    if rel > threshold_deg:
        return Action.TURN_RIGHT
    if rel < -threshold_deg:
        return Action.TURN_LEFT
    return Action.MOVE_FORWARD
