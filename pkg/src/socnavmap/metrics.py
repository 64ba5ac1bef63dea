"""Episode and benchmark metrics: SR, SPL, PSC, H-coll and the Final Score."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np


@dataclass
class EpisodeTrace:
    """Per-step positions recorded after every action.

    ``robot`` has ``total_steps + 1`` rows (the start pose first); each entry
    of ``humans`` is an ``(N, 2)`` array for the state after that step.
    """

    goal: tuple[float, float]
    shortest_path: float
    robot_radius: float = 0.25
    human_radii: tuple[float, ...] = ()
    robot: list = field(default_factory=list)
    humans: list = field(default_factory=list)
    stopped_at_goal: bool = False


@dataclass(frozen=True)
class EpisodeResult:
    success: bool
    path_length: float
    shortest_path: float
    collided: bool
    collision_steps: int
    ps_compliant_steps: int
    total_steps: int
    episode_id: str = ""

    @property
    def spl_term(self) -> float:
        if not self.success:
            return 0.0
        denom = max(self.path_length, self.shortest_path)
        return 1.0 if denom <= 0.0 else self.shortest_path / denom

    @property
    def psc(self) -> float:
        return self.ps_compliant_steps / self.total_steps if self.total_steps else 1.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["spl_term"] = self.spl_term
        d["psc"] = self.psc
        return d


def episode_metrics(
    trace: EpisodeTrace,
    goal_threshold: float = 0.2,
    personal_space: float = 1.0,
    success_clearance: float = 0.1,
    episode_id: str = "",
) -> EpisodeResult:
    """Score one episode.

    A step is a collision when the robot and a human disc overlap. Success
    needs a stop within ``goal_threshold`` of the goal and a gap of at least
    ``success_clearance`` to every human on every step. A step is
    personal-space compliant when every human centre is at least
    ``personal_space`` away.
    """
    if len(trace.humans) == 0 or len(trace.robot) < 2:
        raise ValueError("empty trace")
    robot = np.asarray(trace.robot, dtype=float)
    path_length = float(np.hypot(*np.diff(robot, axis=0).T).sum())
    radii = np.asarray(trace.human_radii, dtype=float)
    collision_steps = 0
    compliant = 0
    min_gap = math.inf
    for pos, humans in zip(robot[1:], trace.humans):
        humans = np.asarray(humans, dtype=float).reshape(-1, 2)
        if len(humans) == 0:
            compliant += 1
            continue
        centre = np.hypot(*(humans - pos).T)
        gap = centre - (trace.robot_radius + radii)
        min_gap = min(min_gap, float(gap.min()))
        if np.any(gap < 0.0):
            collision_steps += 1
        if np.all(centre >= personal_space):
            compliant += 1
    final_dist = float(np.hypot(*(robot[-1] - np.asarray(trace.goal))))
    reached = trace.stopped_at_goal and final_dist <= goal_threshold
    success = bool(reached and min_gap >= success_clearance)
    return EpisodeResult(
        success=success,
        path_length=path_length,
        shortest_path=float(trace.shortest_path),
        collided=collision_steps > 0,
        collision_steps=collision_steps,
        ps_compliant_steps=compliant,
        total_steps=len(trace.humans),
        episode_id=episode_id,
    )


def final_score(sr: float, spl: float, psc: float, h_coll: float) -> float:
    """``0.4 SR + 0.2 SPL + 0.2 PSC + 0.2 (100 - H-coll)`` with every term in percent."""
    return 0.4 * sr + 0.2 * spl + 0.2 * psc + 0.2 * (100.0 - h_coll)


@dataclass
class BenchmarkReport:
    sr: float
    spl: float
    psc: float
    h_coll: float
    final_score: float
    episodes: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    seeds: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def headline(self) -> dict:
        return {"SR": self.sr, "SPL": self.spl, "PSC": self.psc, "H-Coll": self.h_coll, "Final Score": self.final_score}

    def table(self) -> str:
        cols = list(self.headline())
        head = "".join(f"{c:>13}" for c in cols)
        row = "".join(f"{v:>13.2f}" for v in self.headline().values())
        return f"{head}\n{row}"

    def to_dict(self) -> dict:
        return {
            **self.headline(),
            "episodes": [e.to_dict() for e in self.episodes],
            "config": self.config,
            "seeds": self.seeds,
            "errors": self.errors,
        }


def aggregate(results, config: dict | None = None, seeds=None) -> BenchmarkReport:
    """Average episode results into percentages and the Final Score."""
    results = list(results)
    if not results:
        raise ValueError("cannot aggregate an empty result set")
    n = len(results)
    sr = 100.0 * sum(r.success for r in results) / n
    spl = 100.0 * sum(r.spl_term for r in results) / n
    psc = 100.0 * sum(r.psc for r in results) / n
    h_coll = 100.0 * sum(r.collided for r in results) / n
    return BenchmarkReport(
        sr=sr,
        spl=spl,
        psc=psc,
        h_coll=h_coll,
        final_score=final_score(sr, spl, psc, h_coll),
        episodes=results,
        config=dict(config or {}),
        seeds=list(seeds or []),
    )
