"""Zero-shot social navigation: depth mapping, human trajectory forecasting and FMM planning."""

from .agent import SocialNavAgent
from .config import RunConfig, load_config
from .metrics import BenchmarkReport, EpisodeResult, aggregate, episode_metrics, final_score
from .planner import Action
from .runner import run_ablation, run_bench, run_episode, run_sweep
from .sim import EpisodeSpec, Pose, Scene, Simulator, load_scenario, parse_scenario

__version__ = "0.1.0"

__all__ = [
    "Action",
    "BenchmarkReport",
    "EpisodeResult",
    "EpisodeSpec",
    "Pose",
    "RunConfig",
    "Scene",
    "Simulator",
    "SocialNavAgent",
    "aggregate",
    "episode_metrics",
    "final_score",
    "load_config",
    "load_scenario",
    "parse_scenario",
    "run_ablation",
    "run_bench",
    "run_episode",
    "run_sweep",
]
