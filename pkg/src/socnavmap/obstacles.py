"""Human obstacles stamped into the map with a temporal decay."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

NEVER = np.iinfo(np.int64).min


def disk(radius: float) -> np.ndarray:
    """Boolean disk structuring element: all lattice offsets with i² + j² ≤ radius²."""
    k = int(math.floor(max(radius, 0.0) + 1e-9))
    ii, jj = np.mgrid[-k : k + 1, -k : k + 1]
    return ii * ii + jj * jj <= radius * radius + 1e-9


def human_radius_pixels(r_human: float, resolution: float) -> float:
    """Disk radius in cells; ``resolution`` is in metres per cell.

    The conversion is ``r_human * 100 / res_cm`` with the map resolution
    expressed in centimetres per cell (5 px at 0.25 m and 5 cm/cell).
    """
    return r_human * 100.0 / (resolution * 100.0)


@dataclass
class DynamicObstacleLayer:
    """Per-cell creation timestamps of human obstacles.

    ``stamps`` holds ``t_create`` for stamped cells and ``NEVER`` elsewhere.
    """

    shape: tuple[int, int]
    r_pixels: float = 5.0
    t_decay: int = 5
    stamps: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.stamps is None:
            self.stamps = np.full(self.shape, NEVER, dtype=np.int64)

    def copy(self) -> "DynamicObstacleLayer":
        return DynamicObstacleLayer(self.shape, self.r_pixels, self.t_decay, self.stamps.copy())

    @property
    def stamped(self) -> np.ndarray:
        return self.stamps != NEVER

    def active(self, t_current: int) -> np.ndarray:
        """Cells whose age is within the decay period."""
        return self.stamped & (t_current - self.stamps <= self.t_decay)


def rasterize(layer: DynamicObstacleLayer, centers, t: int, r_pixels: float | None = None) -> DynamicObstacleLayer:
    """Stamp every cell whose centre lies within ``r_pixels`` of a centre with time ``t``.

    The cell containing each centre is always stamped, so ``r_pixels = 0``
    marks exactly one cell. Cells outside the grid are skipped. Re-stamping
    refreshes ``t_create``. The layer is modified in place and returned.
    """
    r = layer.r_pixels if r_pixels is None else r_pixels
    h, w = layer.shape
    k = int(math.floor(r + 1e-9)) + 1
    for center in centers:
        cr, cc = float(center[0]), float(center[1])
        if not (math.isfinite(cr) and math.isfinite(cc)):
            raise ValueError(f"non-finite obstacle centre {center!r}")
        r0, r1 = max(int(math.floor(cr)) - k, 0), min(int(math.floor(cr)) + k + 2, h)
        c0, c1 = max(int(math.floor(cc)) - k, 0), min(int(math.floor(cc)) + k + 2, w)
        if r0 >= r1 or c0 >= c1:
            continue
        ii, jj = np.mgrid[r0:r1, c0:c1]
        inside = (ii - cr) ** 2 + (jj - cc) ** 2 <= r * r + 1e-9
        layer.stamps[r0:r1, c0:c1][inside] = t
        nr, nc = int(math.floor(cr + 0.5)), int(math.floor(cc + 0.5))
        if 0 <= nr < h and 0 <= nc < w:
            layer.stamps[nr, nc] = t
    return layer


def expire(layer: DynamicObstacleLayer, t_current: int) -> tuple[DynamicObstacleLayer, np.ndarray]:
    """Remove cells with ``t_current - t_create > t_decay``; return them as a mask."""
    cleared = layer.stamped & (t_current - layer.stamps > layer.t_decay)
    layer.stamps[cleared] = NEVER
    return layer, cleared


def compose(static: np.ndarray, layer: DynamicObstacleLayer, t_current: int) -> np.ndarray:
    """Static occupancy OR the still-active dynamic cells."""
    return np.asarray(static, dtype=bool) | layer.active(t_current)
