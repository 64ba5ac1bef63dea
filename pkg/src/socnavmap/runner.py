"""Episode loop, suite benchmark, ablation table and hyperparameter sweep."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import artifacts
from .agent import SocialNavAgent
from .config import ABLATIONS, RunConfig
from .metrics import BenchmarkReport, EpisodeResult, EpisodeTrace, aggregate, episode_metrics
from .planner import Action
from .sim import Camera, EpisodeSpec, ScenarioError, Simulator, load_scenario

logger = logging.getLogger(__name__)

ABLATION_ROWS = (
    ("full", None),
    ("w/o intermediate goal", "no_intermediate_goal"),
    ("w/o history", "no_history_prediction"),
    ("w/o orientation", "no_orientation_prediction"),
    ("w/o fusion", "no_fusion"),
    ("w/o dynamic obstacles", "no_dynamic_obstacles"),
)
SWEEP_PARAMS = ("r_human", "alpha")


@dataclass
class EpisodeOutcome:
    result: EpisodeResult
    trace: EpisodeTrace
    step_times: list = field(default_factory=list)
    agent: SocialNavAgent | None = None
    reason: str = ""


def camera_for(config: RunConfig) -> Camera:
    return Camera(
        width=config.camera_width,
        height=config.camera_height_px,
        hfov_deg=config.hfov,
        height_m=config.camera_height,
        tilt=math.radians(config.camera_tilt),
    )


def run_episode(
    spec: EpisodeSpec,
    config: RunConfig | None = None,
    episode_dir=None,
    episode_index: int = 0,
    trace: bool = False,
    snapshot_every: int = 0,
) -> EpisodeOutcome:
    """Run one episode to termination and score it.

    ``episode_dir`` receives ``result.json``, and with ``trace`` the planner
    and prediction JSONL traces; ``snapshot_every`` > 0 writes map snapshots
    every that many steps.
    """
    config = config or RunConfig()
    spec = replace(spec, max_steps=min(spec.max_steps, config.max_steps))
    sim = Simulator(
        spec,
        camera_for(config),
        config.observability,
        forward_step=config.forward_step,
        turn_step=config.turn_step,
        goal_radius=config.goal_threshold,
    )
    agent = SocialNavAgent(config)
    obs = sim.reset()
    agent.reset(obs, spec.goal)
    tr = EpisodeTrace(
        goal=spec.goal,
        shortest_path=spec.shortest_path if math.isfinite(spec.shortest_path) else 0.0,
        robot_radius=spec.robot_radius,
        human_radii=tuple(h.radius for h in spec.humans),
        robot=[obs.agent_pose.xy.tolist()],
    )
    if episode_dir is not None:
        episode_dir = Path(episode_dir)
        episode_dir.mkdir(parents=True, exist_ok=True)
    step_times = []
    planner_rows = []
    info = None
    while True:
        t0 = time.perf_counter()
        action = agent.act(obs)
        step_times.append(time.perf_counter() - t0)
        hold = action is Action.STOP and agent.waiting
        d = agent.decisions[-1]
        if trace:
            planner_rows.append(
                {
                    "t": obs.timestep,
                    "action": action.value,
                    "reason": d.reason,
                    "theta_rel": d.theta_rel,
                    "stg": d.stg,
                    "d_start": d.d_start,
                    "target": d.target,
                    "pose": [obs.agent_pose.x, obs.agent_pose.y, obs.agent_pose.heading],
                }
            )
        if episode_dir is not None and snapshot_every and obs.timestep % snapshot_every == 0:
            grid = agent.mapper.grid
            artifacts.write_snapshots(
                episode_dir / "snapshots",
                episode_index,
                obs.timestep,
                grid.static | agent.bumps,
                grid.explored,
                agent.dynamic.active(obs.timestep),
            )
        obs, info = sim.step(action, hold=hold)
        tr.robot.append(obs.agent_pose.xy.tolist())
        tr.humans.append(np.array([h.pose.xy for h in sim.state.humans]).reshape(-1, 2))
        if info.done:
            break
    tr.stopped_at_goal = info.success_candidate
    result = episode_metrics(
        tr,
        config.goal_threshold,
        config.personal_space,
        config.success_clearance,
        episode_id=spec.name or f"ep{episode_index}",
    )
    if episode_dir is not None:
        artifacts.write_json(
            episode_dir / "result.json",
            {
                "result": result.to_dict(),
                "termination": info.reason,
                "seed": spec.seed,
                "map_frame": agent.frame.as_dict(),
                "goal_map": [float(v) for v in agent.goal_map],
            },
        )
        if trace:
            artifacts.write_jsonl(episode_dir / "planner.jsonl", planner_rows)
            artifacts.write_jsonl(episode_dir / "prediction.jsonl", agent.predictor.trace)
    return EpisodeOutcome(result, tr, step_times, agent, info.reason)


def suite_files(suite_dir) -> list[Path]:
    suite_dir = Path(suite_dir)
    if not suite_dir.is_dir():
        raise FileNotFoundError(f"suite directory not found: {suite_dir}")
    files = sorted(suite_dir.glob("*.json"))
    if not files:
        raise ValueError(f"empty suite: no scenario files in {suite_dir}")
    return files


def run_bench(
    suite_dir,
    config: RunConfig | None = None,
    out_dir=None,
    trace: bool = False,
    snapshot_every: int = 0,
    strip_humans: bool = False,
) -> BenchmarkReport:
    """Run every scenario in ``suite_dir``; per-episode seed is ``config.seed ^ index``.

    Scenarios that fail to load are listed in ``report.errors`` and excluded
    from the aggregate. With ``out_dir`` the report JSON/CSV and per-episode
    artifacts are written there.
    """
    config = config or RunConfig()
    files = suite_files(suite_dir)
    results, rows, errors, seeds = [], [], [], []
    for i, path in enumerate(files):
        seed = config.seed ^ i
        seeds.append(seed)
        try:
            spec = load_scenario(path)
        except (ScenarioError, OSError) as exc:
            logger.warning("episode %d (%s) errored: %s", i, path.name, exc)
            errors.append({"index": i, "id": path.stem, "error": str(exc)})
            rows.append({"id": path.stem, "status": "error"})
            continue
        spec = replace(spec, seed=seed, humans=() if strip_humans else spec.humans)
        ep_dir = None if out_dir is None else Path(out_dir) / "episodes" / f"ep{i}"
        outcome = run_episode(spec, config, ep_dir, i, trace, snapshot_every)
        r = outcome.result
        results.append(r)
        rows.append(
            {
                "id": r.episode_id,
                "success": r.success,
                "spl_term": r.spl_term,
                "psc": r.psc,
                "collided": r.collided,
                "steps": r.total_steps,
                "status": "ok",
            }
        )
    if not results:
        raise ValueError(f"no scenario in {suite_dir} could be loaded")
    report = aggregate(results, config.to_dict(), seeds)
    report.errors = errors
    report.rows = rows
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        artifacts.write_json(out_dir / "report.json", report.to_dict())
        (out_dir / "report.csv").write_text(artifacts.episodes_csv(rows))
    return report


def headline_row(report: BenchmarkReport, key: str, value) -> dict:
    return {key: value, **report.headline()}


def run_ablation(suite_dir, config: RunConfig | None = None, out_dir=None, **kwargs) -> list[dict]:
    """Full configuration plus each single-component-removed variant."""
    config = config or RunConfig()
    rows = []
    for label, flag in ABLATION_ROWS:
        variant = config if flag is None else config.replace(**{f: f == flag for f in ABLATIONS})
        sub = None if out_dir is None else Path(out_dir) / (flag or "full")
        report = run_bench(suite_dir, variant, sub, **kwargs)
        rows.append(headline_row(report, "variant", label))
    if out_dir is not None:
        (Path(out_dir) / "ablation.csv").write_text(artifacts.table_csv(rows, "variant"))
    return rows


def run_sweep(suite_dir, param: str, values, config: RunConfig | None = None, out_dir=None, **kwargs) -> list[dict]:
    """One benchmark per value of ``param`` (``r_human`` or ``alpha``)."""
    if param not in SWEEP_PARAMS:
        raise ValueError(f"sweep parameter must be one of {SWEEP_PARAMS}, got {param!r}")
    values = list(values)
    if len(values) < 2:
        raise ValueError("a sweep needs at least two values")
    config = config or RunConfig()
    rows = []
    for v in values:
        sub = None if out_dir is None else Path(out_dir) / f"{param}_{v}"
        report = run_bench(suite_dir, config.replace(**{param: float(v)}), sub, **kwargs)
        rows.append(headline_row(report, param, float(v)))
    if out_dir is not None:
        (Path(out_dir) / "sweep.csv").write_text(artifacts.table_csv(rows, param))
    return rows
