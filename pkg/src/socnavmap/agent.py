"""The zero-shot navigation agent: mapping, prediction, obstacles and planning per step."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import planner
from .config import RunConfig
from .coords import (
    MapFrame,
    clamp_to_map,
    floor_to_world,
    goal_to_map,
    human_heading_to_map,
    human_to_map,
    intermediate_goal,
    robot_heading_to_map,
    to_cell,
)
from .mapping import MapBuilder
from .obstacles import DynamicObstacleLayer, compose, disk, expire, human_radius_pixels, rasterize
from .planner import Action, NoPathError
from .prediction import HumanTrack, PredictionParams, TrajectoryPredictor, update_track

# centre distance below which robot and human discs touch
CONTACT_DISTANCE = 0.55
START_SEARCH_RADIUS = 4
ROBOT_RADIUS = 0.25
# a forward move covering less than this share of a step counts as a bump
BUMP_FRACTION = 0.5


@dataclass(frozen=True)
class Decision:
    action: Action
    reason: str
    theta_rel: float | None
    stg: tuple[float, float] | None
    d_start: float | None
    target: tuple[float, float]


class SocialNavAgent:
    """Stateful per-episode agent; call :meth:`reset` with the first observation."""

    def __init__(self, config: RunConfig | None = None):
        self.config = config or RunConfig()

    def reset(self, obs, goal_xy) -> None:
        cfg = self.config
        self.frame = MapFrame(tuple(float(v) for v in obs.agent_pose.world()), (cfg.grid_size, cfg.grid_size), cfg.resolution)
        self.goal_xy = (float(goal_xy[0]), float(goal_xy[1]))
        self.goal_map = goal_to_map(floor_to_world(*self.goal_xy), self.frame)
        self.mapper = MapBuilder(
            self.frame,
            h_agent=cfg.camera_height,
            camera_tilt=math.radians(cfg.camera_tilt),
            vision_range=cfg.vision_range,
            z_min=cfg.z_min,
            z_max=cfg.z_max,
            hfov_deg=cfg.hfov,
        )
        self.r_pixels = human_radius_pixels(cfg.r_human, cfg.resolution)
        self.dynamic = DynamicObstacleLayer(self.frame.shape, self.r_pixels, cfg.t_decay)
        # wall contacts found by bumping; kept for the whole episode
        self.bumps = np.zeros(self.frame.shape, dtype=bool)
        self.tracks: dict[int, HumanTrack] = {}
        self.predictor = TrajectoryPredictor(
            PredictionParams(
                K=cfg.horizon,
                d_step=cfg.d_step / cfg.resolution,
                w_base=cfg.w_base,
                alpha=cfg.alpha,
                n_update=cfg.n_update,
                mode=cfg.prediction_mode,
            )
        )
        self.last_pose = None
        self.last_action = None
        self.decisions: list[Decision] = []

    # -- helpers ----------------------------------------------------------------

    def _map_point(self, x, y) -> np.ndarray:
        return self.frame.floor_to_map(x, y)

    def _stamp_bump(self, pose) -> None:
        """Mark the cells just ahead of a robot whose forward move was cut short."""
        res = self.config.resolution
        c, s = math.cos(pose.heading), math.sin(pose.heading)
        ahead = ROBOT_RADIUS + res
        for off in (-res, 0.0, res):
            x = pose.x + ahead * c + off * s
            y = pose.y + ahead * s - off * c
            r, k = to_cell(self._map_point(x, y))
            if 0 <= r < self.frame.shape[0] and 0 <= k < self.frame.shape[1]:
                self.bumps[r, k] = True

    def _target(self, agent_map) -> np.ndarray:
        if self.frame.contains(self.goal_map):
            return self.goal_map
        if self.config.no_intermediate_goal:
            return clamp_to_map(self.goal_map, self.frame.shape)
        return intermediate_goal(agent_map, self.goal_map, self.frame.shape, self.frame.shape)

    def _start_cell(self, traversable, start):
        r, c = start
        if traversable[r, c]:
            return start
        k = START_SEARCH_RADIUS
        h, w = traversable.shape
        best = None
        for dr in range(-k, k + 1):
            for dc in range(-k, k + 1):
                nr, nc = r + dr, c + dc
                if 0 <= nr < h and 0 <= nc < w and traversable[nr, nc]:
                    key = (dr * dr + dc * dc, dr, dc)
                    if best is None or key < best[0]:
                        best = (key, (nr, nc))
        return None if best is None else best[1]

    # -- main step ------------------------------------------------------------------

    def act(self, obs) -> Action:
        cfg = self.config
        t = obs.timestep
        pose = obs.agent_pose
        humans_xy = [h.position for h in obs.humans]

        if self.last_action is Action.MOVE_FORWARD and self.last_pose is not None:
            moved = math.hypot(pose.x - self.last_pose.x, pose.y - self.last_pose.y)
            if moved < BUMP_FRACTION * cfg.forward_step:
                self._stamp_bump(pose)

        self.mapper.update(obs.depth, pose, humans_xy)

        # human tracks and forecasts
        seen = []
        for h in obs.humans:
            p = human_to_map(floor_to_world(*h.position), self.frame)
            track = self.tracks.setdefault(h.id, HumanTrack(h.id, cfg.hist_len))
            update_track(track, p, human_heading_to_map(h.orientation), t)
            seen.append(track)
        forecasts = self.predictor.predict_all(seen, t)

        if not cfg.no_dynamic_obstacles:
            centers = [tr.last_position for tr in seen]
            for f in forecasts:
                centers.extend(f.points)
            # contacts with humans are remembered like any other human obstacle
            for hx, hy in humans_xy:
                d = math.hypot(hx - pose.x, hy - pose.y)
                if 0.0 < d < CONTACT_DISTANCE:
                    u = ROBOT_RADIUS / d
                    centers.append(self._map_point(pose.x + (hx - pose.x) * u, pose.y + (hy - pose.y) * u))
            if centers:
                rasterize(self.dynamic, centers, t)
        expire(self.dynamic, t)

        agent_map = self._map_point(pose.x, pose.y)
        start = to_cell(agent_map)
        obstacles = compose(self.mapper.grid.static | self.bumps, self.dynamic, t)
        # never let human obstacles swallow the robot itself
        near = np.zeros(self.frame.shape, dtype=bool)
        k = cfg.robot_dilation
        d = disk(k)
        r0, c0 = start[0] - k, start[1] - k
        rr, cc = np.nonzero(d)
        rr, cc = rr + r0, cc + c0
        ok = (rr >= 0) & (rr < self.frame.shape[0]) & (cc >= 0) & (cc < self.frame.shape[1])
        near[rr[ok], cc[ok]] = True
        dyn_only = obstacles & ~(self.mapper.grid.static | self.bumps)
        obstacles = obstacles & ~(near & dyn_only)

        target = self._target(agent_map)
        at_goal = math.hypot(pose.x - self.goal_xy[0], pose.y - self.goal_xy[1]) <= cfg.goal_threshold
        decision = self._plan(obstacles, start, agent_map, target, pose, at_goal)
        self.decisions.append(decision)
        self.last_pose = pose
        self.last_action = decision.action
        return decision.action

    def _plan(self, obstacles, start, agent_map, target, pose, at_goal) -> Decision:
        cfg = self.config
        tgt = (float(target[0]), float(target[1]))
        if at_goal:
            return Decision(Action.STOP, "at_goal", None, None, None, tgt)
        traversable = planner.traversability(obstacles, cfg.robot_dilation)
        h, w = self.frame.shape
        if not (0 <= start[0] < h and 0 <= start[1] < w):
            return Decision(Action.STOP, "no_path", None, None, None, tgt)
        s = self._start_cell(traversable, start)
        region = planner.goal_region(self.frame.shape, to_cell(target), cfg.goal_dilation) & traversable
        if s is None or not region.any():
            return Decision(Action.STOP, "no_path", None, None, None, tgt)
        try:
            dist = planner.fmm_distance(traversable, region, stop_at=s)
        except NoPathError:
            return Decision(Action.STOP, "no_path", None, None, None, tgt)
        heading = (-math.cos(pose.heading), math.sin(pose.heading))
        stg = planner.extract_stg(dist, s, cfg.lookahead, heading)
        if not stg.valid:
            return Decision(Action.STOP, "no_path", None, None, float(dist[s]), tgt)
        point = stg.point
        if to_cell(point) == to_cell(agent_map):
            point = tgt
        stg = planner.ShortTermGoal(point, True, stg.path)
        theta = robot_heading_to_map(pose.heading)
        action = planner.select_action(theta, tuple(agent_map), stg, False)
        rel = planner.relative_angle(theta, tuple(agent_map), point)
        return Decision(action, "plan", rel, (float(point[0]), float(point[1])), float(dist[s]), tgt)

    @property
    def waiting(self) -> bool:
        """True when the last STOP came from a missing path rather than arrival."""
        return bool(self.decisions) and self.decisions[-1].reason == "no_path"
