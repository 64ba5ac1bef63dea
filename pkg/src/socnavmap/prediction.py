"""Per-human track histories and short-horizon trajectory forecasts."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np


class InsufficientHistory(ValueError):
    pass


@dataclass
class HumanTrack:
    id: int
    max_len: int = 10
    history: deque = field(default=None)
    last_orientation: float = 0.0

    def __post_init__(self):
        if self.history is None:
            self.history = deque(maxlen=self.max_len)
        elif not isinstance(self.history, deque) or self.history.maxlen != self.max_len:
            self.history = deque(self.history, maxlen=self.max_len)

    def __len__(self):
        return len(self.history)

    @property
    def last_position(self) -> np.ndarray:
        return self.history[-1][0]

    @property
    def last_timestep(self) -> int | None:
        return self.history[-1][1] if self.history else None


def update_track(track: HumanTrack, position, orientation: float, t: int) -> HumanTrack:
    """Append an observation; the oldest entry falls off beyond ``max_len``."""
    if track.history and t <= track.history[-1][1]:
        raise ValueError(f"timestep {t} is not after last stored timestep {track.history[-1][1]}")
    track.history.append((np.asarray(position, dtype=float).copy(), int(t)))
    track.last_orientation = float(orientation)
    return track


@dataclass(frozen=True)
class TrajectoryForecast:
    human_id: int
    points: np.ndarray
    source: str

    def __len__(self):
        return len(self.points)


def history_predict(track: HumanTrack, K: int = 10) -> TrajectoryForecast:
    """Least-squares line through each coordinate over time, evaluated at t+1..t+K."""
    if len(track) < 2:
        raise InsufficientHistory(f"human {track.id}: insufficient history ({len(track)} < 2)")
    pos = np.array([p for p, _ in track.history], dtype=float)
    ts = np.array([t for _, t in track.history], dtype=float)
    # Centre the abscissa so the fit is well conditioned for large timesteps.
    t_mean = ts.mean()
    A = np.column_stack([ts - t_mean, np.ones_like(ts)])
    coef, *_ = np.linalg.lstsq(A, pos, rcond=None)
    future = ts[-1] + np.arange(1, K + 1, dtype=float) - t_mean
    points = np.outer(future, coef[0]) + coef[1]
    return TrajectoryForecast(track.id, points, "history")


def orientation_predict(position, theta: float, K: int = 10, d_step: float = 1.0, human_id: int = -1) -> TrajectoryForecast:
    """Constant-heading extrapolation ``p + k * d_step * (cos(theta+pi/2), -sin(theta+pi/2))``."""
    p = np.asarray(position, dtype=float)
    direction = np.array([math.cos(theta + math.pi / 2), -math.sin(theta + math.pi / 2)])
    k = np.arange(1, K + 1, dtype=float)
    return TrajectoryForecast(human_id, p + np.outer(k * d_step, direction), "orientation")


def fusion_weights(K: int, w_base: float = 1.0, alpha: float = 0.5) -> np.ndarray:
    """History weight ``w_base * alpha**k`` for k = 1..K."""
    return w_base * alpha ** np.arange(1, K + 1, dtype=float)


def fuse(hist: TrajectoryForecast, orient: TrajectoryForecast, w_base: float = 1.0, alpha: float = 0.5) -> TrajectoryForecast:
    """Per-step convex blend of the history and heading forecasts."""
    if len(hist) != len(orient):
        raise ValueError(f"forecast lengths differ: {len(hist)} vs {len(orient)}")
    w_hist = fusion_weights(len(hist), w_base, alpha)
    if np.any(w_hist < 0.0) or np.any(w_hist > 1.0):
        raise ValueError(f"fusion weight outside [0, 1] for w_base={w_base}, alpha={alpha}")
    w_orient = 1.0 - w_hist
    points = w_hist[:, None] * hist.points + w_orient[:, None] * orient.points
    return TrajectoryForecast(hist.human_id, points, "fused")


@dataclass(frozen=True)
class PredictionParams:
    K: int = 10
    d_step: float = 1.0
    w_base: float = 1.0
    alpha: float = 0.5
    n_update: int = 10
    # "fused", "average", "history" or "orientation"
    mode: str = "fused"


def forecast_track(track: HumanTrack, params: PredictionParams) -> tuple[TrajectoryForecast, dict]:
    """Forecast for one track plus the component forecasts used (for tracing)."""
    p = track.last_position
    orient = orientation_predict(p, track.last_orientation, params.K, params.d_step, track.id)
    parts = {"orientation": orient}
    if len(track) < 2:
        if params.mode == "history":
            still = np.repeat(p[None, :], params.K, axis=0)
            return TrajectoryForecast(track.id, still, "history"), parts
        return orient, parts
    hist = history_predict(track, params.K)
    parts["history"] = hist
    if params.mode == "orientation":
        return orient, parts
    if params.mode == "history":
        return hist, parts
    if params.mode == "average":
        return fuse(hist, orient, w_base=0.5, alpha=1.0), parts
    return fuse(hist, orient, params.w_base, params.alpha), parts


class TrajectoryPredictor:
    """Recomputes forecasts every ``n_update`` timesteps and serves a cache in between.

    Humans seen for the first time since the last update are forecast
    immediately rather than waiting for the next refresh.
    """

    def __init__(self, params: PredictionParams | None = None):
        self.params = params or PredictionParams()
        self.cache: dict[int, TrajectoryForecast] = {}
        self.last_update: int | None = None
        self.trace: list[dict] = []

    def due(self, t: int) -> bool:
        return self.last_update is None or t - self.last_update >= self.params.n_update

    def predict_all(self, tracks, t: int) -> list[TrajectoryForecast]:
        tracks = list(tracks)
        if self.due(t):
            self.cache = {}
            self.last_update = t
            todo = tracks
        else:
            todo = [tr for tr in tracks if tr.id not in self.cache]
        for tr in todo:
            forecast, parts = forecast_track(tr, self.params)
            self.cache[tr.id] = forecast
            self.trace.append(
                {
                    "t": t,
                    "human_id": tr.id,
                    **{k: v.points.round(6).tolist() for k, v in parts.items()},
                    "fused": forecast.points.round(6).tolist(),
                    "source": forecast.source,
                }
            )
        return [self.cache[tr.id] for tr in tracks if tr.id in self.cache]


def predict_all(tracks, params: PredictionParams | None = None) -> list[TrajectoryForecast]:
    """Uncached forecast for every track."""
    params = params or PredictionParams()
    return [forecast_track(tr, params)[0] for tr in tracks]
