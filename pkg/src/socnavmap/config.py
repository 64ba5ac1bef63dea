"""Run configuration with defaults matching the published setup."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

ABLATIONS = (
    "no_intermediate_goal",
    "no_history_prediction",
    "no_orientation_prediction",
    "no_fusion",
    "no_dynamic_obstacles",
)


@dataclass(frozen=True)
class RunConfig:
    # map
    resolution: float = 0.05
    grid_size: int = 400
    vision_range: int = 100
    z_min: float = 0.2
    z_max: float = 1.5
    # prediction
    hist_len: int = 10
    horizon: int = 10
    n_update: int = 10
    alpha: float = 0.5
    w_base: float = 1.0
    d_step: float = 0.05
    # human obstacles
    r_human: float = 0.25
    t_decay: int = 5
    # planner
    robot_dilation: int = 3
    goal_dilation: int = 4
    lookahead: int = 10
    # thresholds
    goal_threshold: float = 0.2
    personal_space: float = 1.0
    success_clearance: float = 0.1
    max_steps: int = 500
    # robot and sensing
    forward_step: float = 0.25
    turn_step: float = 15.0
    camera_height: float = 0.88
    camera_tilt: float = 0.0
    camera_width: int = 256
    camera_height_px: int = 256
    hfov: float = 90.0
    observability: str = "oracle"
    # ablations
    no_intermediate_goal: bool = False
    no_history_prediction: bool = False
    no_orientation_prediction: bool = False
    no_fusion: bool = False
    no_dynamic_obstacles: bool = False
    # run
    seed: int = 0
    out: str = ""

    def __post_init__(self):
        positive = (
            "resolution", "grid_size", "vision_range", "hist_len", "horizon", "n_update",
            "max_steps", "forward_step", "turn_step", "camera_width", "camera_height_px", "hfov",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        for name in ("r_human", "t_decay", "d_step", "robot_dilation", "goal_dilation", "lookahead",
                     "goal_threshold", "personal_space", "success_clearance", "w_base", "alpha"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)!r}")
        if self.hist_len < 2:
            raise ValueError("hist_len must be at least 2")
        if not self.z_min < self.z_max:
            raise ValueError("z_min must be below z_max")
        if self.w_base * max(self.alpha, 0.0) > 1.0:
            raise ValueError("w_base * alpha must not exceed 1")
        if self.observability not in ("oracle", "fov"):
            raise ValueError(f"unknown observability {self.observability!r}")

    @property
    def ablations(self) -> tuple[str, ...]:
        return tuple(a for a in ABLATIONS if getattr(self, a))

    @property
    def prediction_mode(self) -> str:
        if self.no_history_prediction:
            return "orientation"
        if self.no_orientation_prediction:
            return "history"
        if self.no_fusion:
            return "average"
        return "fused"

    @property
    def out_dir(self) -> Path:
        return Path(self.out or os.environ.get("SOCIALNAV_OUT", "out"))

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)


def load_config(path) -> RunConfig:
    """Read a TOML or JSON config file (chosen by extension)."""
    path = Path(path)
    text = path.read_bytes()
    if path.suffix.lower() == ".toml":
        data = tomllib.loads(text.decode())
    else:
        data = json.loads(text)
    return RunConfig.from_dict(data)
