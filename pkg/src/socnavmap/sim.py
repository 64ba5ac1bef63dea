"""Deterministic 2.5D episode simulator.

Geometry lives on the floor plane ``(x, y)`` in metres with headings
counter-clockwise from +x. Walls are segments extruded to ``wall_height``;
humans are vertical cylinders. The robot only ever sees depth images,
its own pose, and the human list exposed by :func:`observe_humans`.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np

from . import geometry
from .coords import floor_to_world
from .planner import Action, NoPathError, fmm_distance

FORWARD_STEP = 0.25
TURN_STEP_DEG = 15.0
ROBOT_RADIUS = 0.25
HUMAN_RADIUS = 0.3
HUMAN_HEIGHT = 1.7
GOAL_RADIUS = 0.2
MAX_STEPS = 500


class ScenarioError(ValueError):
    """Invalid scenario; ``errors`` lists every violated check."""

    def __init__(self, errors, path=None):
        self.errors = list(errors)
        self.path = path
        where = f"{path}: " if path else ""
        super().__init__(where + "; ".join(self.errors))


class EpisodeTerminated(RuntimeError):
    pass


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    heading: float = 0.0

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def world(self, height: float = 0.0) -> np.ndarray:
        return floor_to_world(self.x, self.y, height)


@dataclass(frozen=True, eq=False)
class Scene:
    bounds: tuple[float, float, float, float]
    walls: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))
    wall_height: float = 3.0

    def __post_init__(self):
        object.__setattr__(self, "walls", np.asarray(self.walls, dtype=float).reshape(-1, 4))

    @cached_property
    def boundary(self) -> np.ndarray:
        x0, y0, x1, y1 = self.bounds
        return np.array([[x0, y0, x1, y0], [x1, y0, x1, y1], [x1, y1, x0, y1], [x0, y1, x0, y0]], dtype=float)

    @cached_property
    def collision_segments(self) -> np.ndarray:
        """Walls plus the bounds rectangle; used for motion, not rendering."""
        return np.vstack([self.walls, self.boundary])

    def inside(self, x: float, y: float) -> bool:
        x0, y0, x1, y1 = self.bounds
        return x0 <= x <= x1 and y0 <= y <= y1

    def clearance(self, x: float, y: float) -> float:
        d = geometry.point_segment_distance([[x, y]], self.collision_segments)
        return float(d.min()) if d.size else math.inf


@dataclass(frozen=True)
class Camera:
    """Pinhole depth camera mounted on the robot.

    ``tilt`` is the elevation of the optical axis above horizontal (rad).
    """

    width: int = 256
    height: int = 256
    hfov_deg: float = 90.0
    height_m: float = 0.88
    tilt: float = 0.0
    max_range: float = 10.0

    @property
    def fx(self) -> float:
        return (self.width / 2.0) / math.tan(math.radians(self.hfov_deg) / 2.0)

    @property
    def fy(self) -> float:
        return self.fx

    @property
    def cx(self) -> float:
        return self.width / 2.0

    @property
    def cy(self) -> float:
        return self.height / 2.0

    @property
    def K(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    @property
    def x_rotation(self) -> float:
        """Rotation about x taking optical axes (right, down, forward) to (right, forward, up)."""
        return self.tilt - math.pi / 2.0

    @cached_property
    def agent_rays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-pixel ray (right, forward, up) components for unit optical depth."""
        v, u = np.mgrid[0 : self.height, 0 : self.width].astype(float)
        xo = (u - self.cx) / self.fx
        yo = (v - self.cy) / self.fy
        a = self.x_rotation
        fwd = math.cos(a) * yo - math.sin(a) * 1.0
        up = math.sin(a) * yo + math.cos(a) * 1.0
        return xo, fwd, up


@dataclass(frozen=True)
class DepthImage:
    data: np.ndarray
    fx: float
    fy: float
    cx: float
    cy: float
    max_range: float

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def K(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class HumanAgent:
    id: int
    pose: Pose
    waypoints: tuple[tuple[float, float], ...] = ()
    speed_factor: float = 1.0
    pause_prob: float = 0.0
    radius: float = HUMAN_RADIUS
    waypoint_index: int = 0
    height: float = HUMAN_HEIGHT


@dataclass(frozen=True)
class RobotState:
    pose: Pose
    radius: float = ROBOT_RADIUS
    forward_step: float = FORWARD_STEP
    turn_step: float = TURN_STEP_DEG


@dataclass(frozen=True)
class HumanObservation:
    id: int
    position: tuple[float, float]
    orientation: float


@dataclass(frozen=True)
class Observation:
    depth: DepthImage
    agent_pose: Pose
    humans: tuple[HumanObservation, ...]
    timestep: int


@dataclass(frozen=True)
class EpisodeSpec:
    scene: Scene
    robot_start: Pose
    goal: tuple[float, float]
    humans: tuple[HumanAgent, ...] = ()
    seed: int = 0
    max_steps: int = MAX_STEPS
    robot_radius: float = ROBOT_RADIUS
    name: str = ""
    shortest_path: float = math.nan


def render_depth(scene: Scene, pose: Pose, camera: Camera | None = None, humans=()) -> DepthImage:
    """Planar depth image of walls and human cylinders seen from ``pose``.

    Pixels that hit nothing (or hit beyond ``max_range``) carry ``max_range``.
    """
    camera = camera or Camera()
    right, fwd, up = camera.agent_rays
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    hx = fwd * c + right * s
    hy = fwd * s - right * c
    level = camera.tilt == 0.0
    if level:
        # horizontal ray direction depends on the column only
        rays = np.stack([hx[0], hy[0]], axis=1)
    else:
        rays = np.stack([hx.ravel(), hy.ravel()], axis=1)
    origin = (pose.x, pose.y)
    shape = up.shape

    def per_pixel(values: np.ndarray) -> np.ndarray:
        return np.broadcast_to(values[None, :], shape) if level else values.reshape(shape)

    depth = np.full(shape, np.inf)
    if len(scene.walls):
        s_wall = per_pixel(geometry.ray_segment_hits(origin, rays, scene.walls).min(axis=1))
        z = camera.height_m + s_wall * up
        ok = np.isfinite(s_wall) & (z >= 0.0) & (z <= scene.wall_height)
        depth = np.where(ok, np.minimum(depth, s_wall), depth)
    humans = list(humans)
    if humans:
        centers = [h.pose.xy for h in humans]
        radii = [h.radius for h in humans]
        s_h = geometry.ray_circle_hits(origin, rays, centers, radii)
        for k, h in enumerate(humans):
            sk = per_pixel(s_h[:, k])
            z = camera.height_m + sk * up
            ok = np.isfinite(sk) & (z >= 0.0) & (z <= h.height)
            depth = np.where(ok, np.minimum(depth, sk), depth)
    depth = np.where(depth >= camera.max_range, camera.max_range, depth)
    return DepthImage(depth, camera.fx, camera.fy, camera.cx, camera.cy, camera.max_range)


def observe_humans(
    scene: Scene,
    robot: RobotState,
    humans,
    mode: str = "oracle",
    fov_range: float = 5.0,
    fov_deg: float = 90.0,
) -> list[HumanObservation]:
    """Human positions and headings available to the agent.

    ``oracle`` reports every human; ``fov`` keeps those within range, inside
    the horizontal field of view, and with an unobstructed line of sight.
    """
    out = []
    for h in humans:
        if mode == "fov":
            d = h.pose.xy - robot.pose.xy
            dist = float(np.hypot(*d))
            if dist > fov_range:
                continue
            bearing = math.atan2(d[1], d[0]) - robot.pose.heading
            bearing = (bearing + math.pi) % (2 * math.pi) - math.pi
            if abs(bearing) > math.radians(fov_deg) / 2.0 + 1e-12:
                continue
            if len(scene.walls) and geometry.segments_intersect(robot.pose.xy, h.pose.xy, scene.walls).any():
                continue
        elif mode != "oracle":
            raise ValueError(f"unknown observability mode {mode!r}")
        out.append(HumanObservation(h.id, (h.pose.x, h.pose.y), h.pose.heading))
    return out


def human_policy_step(human: HumanAgent, rng: np.random.Generator, scene: Scene | None = None, forward_step: float = FORWARD_STEP) -> HumanAgent:
    """Advance a scripted human by one decision.

    The human pauses with probability ``pause_prob``; otherwise it walks
    ``speed_factor * forward_step`` toward its current waypoint, switching
    (cyclically) to the next waypoint once within one step of it. A step that
    would bring the human into contact with a wall is not taken.
    """
    if rng.random() < human.pause_prob or not human.waypoints:
        return human
    step = human.speed_factor * forward_step
    idx = human.waypoint_index % len(human.waypoints)
    pos = human.pose.xy
    target = np.asarray(human.waypoints[idx], dtype=float)
    if np.hypot(*(target - pos)) <= step:
        idx = (idx + 1) % len(human.waypoints)
        target = np.asarray(human.waypoints[idx], dtype=float)
    delta = target - pos
    dist = float(np.hypot(*delta))
    if dist == 0.0:
        return replace(human, waypoint_index=idx)
    direction = delta / dist
    if scene is not None:
        free = geometry.disc_sweep_limit(pos, direction, step, human.radius, scene.collision_segments)
        if free < step:
            return replace(human, waypoint_index=idx)
    new = pos + direction * step
    heading = math.atan2(direction[1], direction[0])
    return replace(human, pose=Pose(float(new[0]), float(new[1]), heading), waypoint_index=idx)


def min_human_distance(robot: RobotState, humans) -> float:
    """Smallest gap between the robot disc and any human disc, clamped at 0."""
    best = math.inf
    for h in humans:
        gap = float(np.hypot(*(h.pose.xy - robot.pose.xy))) - (robot.radius + h.radius)
        best = min(best, max(gap, 0.0))
    return best


def robot_motion(scene: Scene, robot: RobotState, action: Action, slide: bool = True) -> tuple[RobotState, bool]:
    """Apply one robot action; returns the new state and whether a wall blocked it.

    A forward move stops at first wall contact. With ``slide`` the unused
    part of the step is then projected onto the wall tangent and swept
    again, so glancing contacts slide along the wall; head-on contacts
    still stop dead.
    """
    action = Action(action)
    pose = robot.pose
    if action is Action.MOVE_FORWARD:
        direction = np.array([math.cos(pose.heading), math.sin(pose.heading)])
        segs = scene.collision_segments
        free = geometry.disc_sweep_limit(pose.xy, direction, robot.forward_step, robot.radius, segs)
        new = pose.xy + direction * free
        blocked = free < robot.forward_step - 1e-9
        if blocked and slide:
            new = _slide(new, direction, robot.forward_step - free, robot.radius, segs)
        return replace(robot, pose=Pose(float(new[0]), float(new[1]), pose.heading)), blocked
    if action is Action.TURN_LEFT:
        return replace(robot, pose=Pose(pose.x, pose.y, _wrap(pose.heading + math.radians(robot.turn_step)))), False
    if action is Action.TURN_RIGHT:
        return replace(robot, pose=Pose(pose.x, pose.y, _wrap(pose.heading - math.radians(robot.turn_step)))), False
    return robot, False


def _slide(pos, direction, remaining, radius, segments) -> np.ndarray:
    closest, dist = geometry.nearest_point(pos, segments)
    if dist <= 0.0:
        return pos
    normal = (pos - closest) / dist
    tangent = direction - (direction @ normal) * normal
    length = float(np.hypot(*tangent)) * remaining
    if length < 1e-6:
        return pos
    tangent = tangent / np.hypot(*tangent)
    # lean away from the wall by a hair so the contact side is not re-hit
    tangent = tangent + 1e-6 * normal
    tangent = tangent / np.hypot(*tangent)
    free = geometry.disc_sweep_limit(pos, tangent, length, radius, segments)
    return pos + tangent * free


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2 * math.pi) - math.pi


@dataclass
class EpisodeState:
    robot: RobotState
    humans: tuple[HumanAgent, ...]
    rngs: list
    t: int = 0
    done: bool = False
    reason: str = ""


@dataclass(frozen=True)
class StepInfo:
    done: bool
    reason: str
    success_candidate: bool
    blocked: bool
    goal_distance: float


def initial_state(spec: EpisodeSpec, forward_step: float = FORWARD_STEP, turn_step: float = TURN_STEP_DEG) -> EpisodeState:
    seqs = np.random.SeedSequence(spec.seed).spawn(len(spec.humans))
    return EpisodeState(
        robot=RobotState(spec.robot_start, spec.robot_radius, forward_step, turn_step),
        humans=tuple(spec.humans),
        rngs=[np.random.default_rng(s) for s in seqs],
    )


def step(
    spec: EpisodeSpec, state: EpisodeState, action, goal_radius: float = GOAL_RADIUS, hold: bool = False
) -> tuple[EpisodeState, StepInfo]:
    """Execute one action and advance every human; ``state`` is not modified.

    With ``hold`` a stop keeps the robot in place without ending the episode
    (used when the agent has no valid path and waits).
    """
    if state.done:
        raise EpisodeTerminated(f"step after termination ({state.reason}) at t={state.t}")
    action = Action(action)
    rngs = copy.deepcopy(state.rngs)
    robot, blocked = robot_motion(spec.scene, state.robot, action)
    humans = tuple(
        human_policy_step(h, rng, spec.scene, state.robot.forward_step) for h, rng in zip(state.humans, rngs)
    )
    t = state.t + 1
    goal_distance = float(np.hypot(robot.pose.x - spec.goal[0], robot.pose.y - spec.goal[1]))
    done, reason = False, ""
    if action is Action.STOP and not hold:
        done, reason = True, "stop"
    elif t >= spec.max_steps:
        done, reason = True, "max_steps"
    stopped = action is Action.STOP and not hold
    info = StepInfo(done, reason, stopped and goal_distance <= goal_radius, blocked, goal_distance)
    return EpisodeState(robot, humans, rngs, t, done, reason), info


class Simulator:
    """Stateful wrapper around :func:`step` producing observations."""

    def __init__(
        self,
        spec: EpisodeSpec,
        camera: Camera | None = None,
        observability: str = "oracle",
        forward_step: float = FORWARD_STEP,
        turn_step: float = TURN_STEP_DEG,
        goal_radius: float = GOAL_RADIUS,
        fov_range: float = 5.0,
        fov_deg: float = 90.0,
    ):
        self.spec = spec
        self.camera = camera or Camera()
        self.observability = observability
        self.forward_step = forward_step
        self.turn_step = turn_step
        self.goal_radius = goal_radius
        self.fov_range = fov_range
        self.fov_deg = fov_deg
        self.state: EpisodeState | None = None

    def reset(self) -> Observation:
        self.state = initial_state(self.spec, self.forward_step, self.turn_step)
        return self.observe()

    def observe(self) -> Observation:
        st = self.state
        depth = render_depth(self.spec.scene, st.robot.pose, self.camera, st.humans)
        humans = observe_humans(self.spec.scene, st.robot, st.humans, self.observability, self.fov_range, self.fov_deg)
        return Observation(depth, st.robot.pose, tuple(humans), st.t)

    def step(self, action, hold: bool = False) -> tuple[Observation, StepInfo]:
        self.state, info = step(self.spec, self.state, action, self.goal_radius, hold)
        return self.observe(), info


# --- scenarios -------------------------------------------------------------


def static_free_space(scene: Scene, radius: float, resolution: float = 0.05):
    """Cells (over the scene bounds) where a disc of ``radius`` touches no wall.

    Returns ``(free, origin)`` with cell ``(i, j)`` centred at
    ``origin + ((i + 0.5) * res, (j + 0.5) * res)`` in ``(x, y)``.
    """
    x0, y0, x1, y1 = scene.bounds
    nx = max(int(math.ceil((x1 - x0) / resolution)), 1)
    ny = max(int(math.ceil((y1 - y0) / resolution)), 1)
    xs = x0 + (np.arange(nx) + 0.5) * resolution
    ys = y0 + (np.arange(ny) + 0.5) * resolution
    pts = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
    clearance = np.full(len(pts), np.inf)
    for seg in scene.collision_segments:
        clearance = np.minimum(clearance, geometry.point_segment_distance(pts, seg[None])[:, 0])
    return (clearance >= radius).reshape(nx, ny), (x0, y0)


def static_geodesic(scene: Scene, start, goal, radius: float = ROBOT_RADIUS, resolution: float = 0.05) -> float:
    """Shortest collision-free path length (m) for a disc robot, ``inf`` if unreachable."""
    free, (x0, y0) = static_free_space(scene, radius, resolution)

    def cell(p):
        return (
            min(max(int((p[0] - x0) / resolution), 0), free.shape[0] - 1),
            min(max(int((p[1] - y0) / resolution), 0), free.shape[1] - 1),
        )

    gc, sc = cell(goal), cell(start)
    if not free[gc] or not free[sc]:
        return math.inf
    try:
        dist = fmm_distance(free, [gc], stop_at=sc)
    except NoPathError:
        return math.inf
    return float(dist[sc] * resolution)


def _num(value, name, errors, lo=None, hi=None):
    try:
        v = float(value)
    except (TypeError, ValueError):
        errors.append(f"{name} is not a number: {value!r}")
        return None
    if not math.isfinite(v):
        errors.append(f"{name} is not finite")
        return None
    if lo is not None and v < lo or hi is not None and v > hi:
        errors.append(f"{name}={v} outside [{lo}, {hi}]")
    return v


def _vec(value, n, name, errors):
    if not isinstance(value, (list, tuple)) or len(value) != n:
        errors.append(f"{name} must be a list of {n} numbers")
        return None
    out = [_num(v, f"{name}[{i}]", errors) for i, v in enumerate(value)]
    return None if any(v is None for v in out) else out


def parse_scenario(data: dict, name: str = "", check_reachable: bool = True) -> EpisodeSpec:
    """Validate a scenario dictionary and build an :class:`EpisodeSpec`."""
    errors: list[str] = []
    if not isinstance(data, dict):
        raise ScenarioError(["scenario must be a JSON object"])
    for key in ("scene", "robot", "goal"):
        if key not in data:
            errors.append(f"missing key {key!r}")
    if errors:
        raise ScenarioError(errors)

    scene_d = data["scene"] if isinstance(data["scene"], dict) else {}
    bounds = _vec(scene_d.get("bounds"), 4, "scene.bounds", errors)
    if bounds and (bounds[2] <= bounds[0] or bounds[3] <= bounds[1]):
        errors.append(f"scene.bounds degenerate: {bounds}")
        bounds = None
    walls = []
    for i, w in enumerate(scene_d.get("walls", [])):
        v = _vec(w, 4, f"scene.walls[{i}]", errors)
        if v is None:
            continue
        if bounds and not all(
            bounds[0] - 1e-9 <= x <= bounds[2] + 1e-9 and bounds[1] - 1e-9 <= y <= bounds[3] + 1e-9
            for x, y in ((v[0], v[1]), (v[2], v[3]))
        ):
            errors.append(f"scene.walls[{i}] outside bounds")
        walls.append(v)
    wall_height = _num(scene_d.get("wall_height", 3.0), "scene.wall_height", errors, lo=0.0)

    robot_d = data["robot"] if isinstance(data["robot"], dict) else {}
    start = _vec(robot_d.get("start"), 3, "robot.start", errors)
    radius = _num(robot_d.get("radius", ROBOT_RADIUS), "robot.radius", errors, lo=1e-6)
    goal = _vec(data["goal"], 2, "goal", errors)
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        errors.append(f"seed must be an integer: {seed!r}")
        seed = 0
    max_steps = data.get("max_steps", MAX_STEPS)
    if not isinstance(max_steps, int) or max_steps <= 0:
        errors.append(f"max_steps must be a positive integer: {max_steps!r}")
        max_steps = MAX_STEPS

    scene = Scene(tuple(bounds), np.array(walls).reshape(-1, 4), wall_height or 3.0) if bounds else None

    humans = []
    seen_ids = set()
    for i, h in enumerate(data.get("humans", [])):
        label = f"humans[{i}]"
        if not isinstance(h, dict):
            errors.append(f"{label} must be an object")
            continue
        hid = h.get("id", i)
        if not isinstance(hid, int) or hid in seen_ids:
            errors.append(f"{label}.id must be a unique integer")
        seen_ids.add(hid)
        hs = _vec(h.get("start"), 3, f"{label}.start", errors)
        wps = []
        for j, wp in enumerate(h.get("waypoints", [])):
            v = _vec(wp, 2, f"{label}.waypoints[{j}]", errors)
            if v is not None:
                if scene and not scene.inside(*v):
                    errors.append(f"{label}.waypoints[{j}] outside bounds")
                wps.append(tuple(v))
        sf = _num(h.get("speed_factor", 1.0), f"{label}.speed_factor", errors, 0.8, 1.2)
        pp = _num(h.get("pause_prob", 0.0), f"{label}.pause_prob", errors, 0.0, 1.0)
        hr = _num(h.get("radius", HUMAN_RADIUS), f"{label}.radius", errors, lo=1e-6)
        if hs is None or sf is None or pp is None or hr is None:
            continue
        if scene and not scene.inside(hs[0], hs[1]):
            errors.append(f"{label} outside bounds")
        elif scene and scene.clearance(hs[0], hs[1]) < hr:
            errors.append(f"{label} intersects a wall")
        humans.append(
            HumanAgent(hid, Pose(hs[0], hs[1], math.radians(hs[2])), tuple(wps), sf, pp, hr)
        )

    if scene and start:
        if not scene.inside(start[0], start[1]):
            errors.append("robot start outside bounds")
        elif radius and scene.clearance(start[0], start[1]) < radius:
            errors.append("robot start intersects a wall")
    if scene and goal and not scene.inside(goal[0], goal[1]):
        errors.append("goal outside bounds")
    if errors:
        raise ScenarioError(errors)

    shortest = math.nan
    if check_reachable:
        shortest = static_geodesic(scene, start[:2], goal, radius)
        if not math.isfinite(shortest):
            raise ScenarioError(["goal unreachable"])
    return EpisodeSpec(
        scene=scene,
        robot_start=Pose(start[0], start[1], math.radians(start[2])),
        goal=(goal[0], goal[1]),
        humans=tuple(humans),
        seed=seed,
        max_steps=max_steps,
        robot_radius=radius,
        name=name or str(data.get("name", "")),
        shortest_path=shortest,
    )


def load_scenario(path, check_reachable: bool = True) -> EpisodeSpec:
    """Read and validate a scenario JSON file."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"scenario file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"parse error: {exc}"], path) from exc
    try:
        return parse_scenario(data, name=path.stem, check_reachable=check_reachable)
    except ScenarioError as exc:
        raise ScenarioError(exc.errors, path) from None


def scenario_to_dict(spec: EpisodeSpec) -> dict:
    return {
        "name": spec.name,
        "scene": {
            "bounds": list(spec.scene.bounds),
            "walls": spec.scene.walls.tolist(),
            "wall_height": spec.scene.wall_height,
        },
        "robot": {
            "start": [spec.robot_start.x, spec.robot_start.y, math.degrees(spec.robot_start.heading)],
            "radius": spec.robot_radius,
        },
        "goal": list(spec.goal),
        "humans": [
            {
                "id": h.id,
                "start": [h.pose.x, h.pose.y, math.degrees(h.pose.heading)],
                "waypoints": [list(w) for w in h.waypoints],
                "speed_factor": h.speed_factor,
                "pause_prob": h.pause_prob,
                "radius": h.radius,
            }
            for h in spec.humans
        ],
        "seed": spec.seed,
        "max_steps": spec.max_steps,
    }
