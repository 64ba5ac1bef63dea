"""Procedural scenarios: rooms in a row joined by doorways or corridors, with waypoint humans.

Every generated scenario is round-tripped through :func:`parse_scenario`,
which rejects unreachable goals, so feasibility is oracle-checked.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import geometry
from .sim import HUMAN_RADIUS, ROBOT_RADIUS, ScenarioError, Scene, parse_scenario

MIN_DOOR = 1.0
MIN_CORRIDOR = 1.2
# keep start-to-goal offsets inside the 20 m map around the start
MAX_AXIS_OFFSET = 9.0
HUMAN_KEEPOUT = 1.5


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GenParams:
    rooms: tuple[int, int] = (1, 3)
    corridor_width: tuple[float, float] = (1.2, 1.8)
    door_width: tuple[float, float] = (1.0, 1.4)
    humans: tuple[int, int] = (3, 6)
    room_size: tuple[float, float] = (3.5, 5.0)
    corridor_prob: float = 0.5
    furniture: tuple[int, int] = (0, 2)
    min_goal_distance: float = 2.0
    retries: int = 200

    def __post_init__(self):
        for name in ("rooms", "corridor_width", "door_width", "humans", "room_size", "furniture"):
            lo, hi = getattr(self, name)
            if lo > hi or lo < 0:
                raise ValueError(f"{name} range invalid: {(lo, hi)}")
        if self.rooms[0] < 1:
            raise ValueError("need at least one room")
        if self.corridor_width[0] < MIN_CORRIDOR:
            raise ValueError(f"corridors must be at least {MIN_CORRIDOR} m wide")
        if self.door_width[0] < MIN_DOOR:
            raise ValueError(f"doorways must be at least {MIN_DOOR} m wide")


def _wall_with_gap(x, y0, y1, gap_lo, gap_hi) -> list[list[float]]:
    """Vertical wall at ``x`` from ``y0`` to ``y1`` with an opening ``[gap_lo, gap_hi]``."""
    out = []
    if gap_lo > y0:
        out.append([x, y0, x, gap_lo])
    if gap_hi < y1:
        out.append([x, gap_hi, x, y1])
    return out


def _layout(rng, p: GenParams):
    n = int(rng.integers(p.rooms[0], p.rooms[1] + 1))
    height = float(rng.uniform(*p.room_size))
    walls, rooms = [], []
    x = 0.0
    for i in range(n):
        w = float(rng.uniform(*p.room_size))
        rooms.append((x, 0.0, x + w, height))
        x += w
        if i == n - 1:
            break
        if rng.random() < p.corridor_prob:
            cw = float(rng.uniform(*p.corridor_width))
            length = float(rng.uniform(1.5, 3.0))
            yc = float(rng.uniform(cw / 2 + 0.3, height - cw / 2 - 0.3))
            lo, hi = yc - cw / 2, yc + cw / 2
            walls += _wall_with_gap(x, 0.0, height, lo, hi)
            walls += _wall_with_gap(x + length, 0.0, height, lo, hi)
            walls += [[x, lo, x + length, lo], [x, hi, x + length, hi]]
            x += length
        else:
            dw = float(rng.uniform(*p.door_width))
            lo = float(rng.uniform(0.3, height - dw - 0.3))
            walls += _wall_with_gap(x, 0.0, height, lo, lo + dw)
    bounds = (0.0, 0.0, x, height)
    # furniture: axis-aligned boxes well inside rooms
    for x0, y0, x1, y1 in rooms:
        for _ in range(int(rng.integers(p.furniture[0], p.furniture[1] + 1))):
            bw, bh = rng.uniform(0.4, 1.0, size=2)
            bx = float(rng.uniform(x0 + 1.0, max(x1 - 1.0 - bw, x0 + 1.0)))
            by = float(rng.uniform(y0 + 1.0, max(y1 - 1.0 - bh, y0 + 1.0)))
            c = [(bx, by), (bx + bw, by), (bx + bw, by + bh), (bx, by + bh)]
            walls += [[*c[k], *c[(k + 1) % 4]] for k in range(4)]
    return bounds, walls, rooms


def _clear_path(scene: Scene, a, b, radius: float) -> bool:
    a, b = np.asarray(a, float), np.asarray(b, float)
    n = max(int(np.hypot(*(b - a)) / 0.05), 1)
    pts = a + np.linspace(0.0, 1.0, n + 1)[:, None] * (b - a)
    d = geometry.point_segment_distance(pts, scene.collision_segments)
    return bool(d.min() >= radius)


def _free_point(rng, scene: Scene, rooms, margin: float):
    for _ in range(100):
        x0, y0, x1, y1 = rooms[int(rng.integers(len(rooms)))]
        pt = (float(rng.uniform(x0 + margin, x1 - margin)), float(rng.uniform(y0 + margin, y1 - margin)))
        if scene.clearance(*pt) >= margin:
            return pt
    return None


def _human(rng, scene, rooms, hid, avoid):
    """A human looping over 2-3 waypoints joined by wall-free straight legs.

    Waypoints keep ``HUMAN_KEEPOUT`` from every point in ``avoid`` (robot
    start and goal) so no human parks on them; legs may still cross them.
    """
    r = HUMAN_RADIUS

    def ok(pt):
        return pt is not None and all(math.dist(pt, a) >= HUMAN_KEEPOUT for a in avoid)

    for _ in range(50):
        start = _free_point(rng, scene, rooms, r + 0.2)
        if not ok(start):
            continue
        wps = [start]
        for _ in range(int(rng.integers(1, 3))):
            nxt = _free_point(rng, scene, rooms, r + 0.2)
            if ok(nxt) and math.dist(nxt, wps[-1]) > 1.0 and _clear_path(scene, wps[-1], nxt, r + 0.05):
                wps.append(nxt)
        if len(wps) < 2 or not _clear_path(scene, wps[-1], wps[0], r + 0.05):
            continue
        heading = math.degrees(math.atan2(wps[1][1] - start[1], wps[1][0] - start[0]))
        return {
            "id": hid,
            "start": [start[0], start[1], heading],
            "waypoints": [list(w) for w in wps[1:] + wps[:1]],
            "speed_factor": float(rng.uniform(0.8, 1.2)),
            "pause_prob": float(rng.uniform(0.0, 0.2)),
            "radius": r,
        }
    return None


def _rounded(obj):
    if isinstance(obj, float):
        return round(obj, 3)
    if isinstance(obj, list):
        return [_rounded(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    return obj


def generate_scenario(seed: int, index: int = 0, params: GenParams | None = None) -> dict:
    """One feasible scenario dictionary; raises :class:`GenerationError` after the retry budget."""
    p = params or GenParams()
    rng = np.random.default_rng([seed, index])
    for _ in range(p.retries):
        bounds, walls, rooms = _layout(rng, p)
        scene = Scene(bounds, np.array(walls, dtype=float).reshape(-1, 4))
        start = _free_point(rng, scene, rooms, ROBOT_RADIUS + 0.25)
        goal = _free_point(rng, scene, rooms, ROBOT_RADIUS + 0.25)
        if start is None or goal is None:
            continue
        if math.dist(start, goal) < p.min_goal_distance:
            continue
        if max(abs(goal[0] - start[0]), abs(goal[1] - start[1])) > MAX_AXIS_OFFSET:
            continue
        n_h = int(rng.integers(p.humans[0], p.humans[1] + 1))
        humans = []
        for hid in range(n_h):
            h = _human(rng, scene, rooms, hid, [start, goal])
            if h is None:
                break
            humans.append(h)
        if len(humans) < n_h:
            continue
        data = _rounded(
            {
                "name": f"gen_s{seed}_{index:03d}",
                "scene": {"bounds": list(bounds), "walls": walls, "wall_height": 3.0},
                "robot": {"start": [start[0], start[1], float(rng.uniform(-180.0, 180.0))], "radius": ROBOT_RADIUS},
                "goal": list(goal),
                "humans": humans,
                "seed": int(index),
                "max_steps": 500,
            }
        )
        try:
            parse_scenario(data)
        except ScenarioError:
            continue
        return data
    raise GenerationError(f"no feasible scenario for seed {seed} (index {index}) after {p.retries} attempts")


def generate_suite(out_dir, count: int, seed: int = 0, params: GenParams | None = None) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(count):
        data = generate_scenario(seed, i, params)
        path = out_dir / f"{data['name']}.json"
        path.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")
        paths.append(path)
    return paths
