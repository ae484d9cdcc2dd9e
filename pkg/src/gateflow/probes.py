"""Density monitoring in four square regions along the corridor.

Regions sit at x = L/5, 2L/5, 3L/5, 4L/5 (region 4 nearest the gate),
vertically centered and truncated to the corridor when the side exceeds
its height.  Counts use half-open boxes (lower edges in, upper edges
out) so touching regions never double-count.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .model import Geometry, Vec2

DENSITY_HEADER = "t,rho1,rho2,rho3,rho4,n_active,n_s1,n_s2,n_s3,n_s4"


@dataclass
class Region:
    center: Vec2
    side: float

    def bounds(self, geometry: Geometry) -> tuple[float, float, float, float]:
        """(x0, x1, y0, y1) with the vertical extent clipped to [0, H]."""
        half = self.side / 2.0
        return (
            float(self.center[0]) - half,
            float(self.center[0]) + half,
            max(float(self.center[1]) - half, 0.0),
            min(float(self.center[1]) + half, geometry.height),
        )

    def area(self, geometry: Geometry) -> float:
        x0, x1, y0, y1 = self.bounds(geometry)
        return (x1 - x0) * (y1 - y0)


def default_regions(length: float, height: float, side: float) -> list[Region]:
    return [Region(np.array([i * length / 5.0, height / 2.0]), side)
            for i in range(1, 5)]


def count_inside(positions: np.ndarray, active: np.ndarray,
                 region: Region, geometry: Geometry) -> int:
    x0, x1, y0, y1 = region.bounds(geometry)
    x, y = positions[:, 0], positions[:, 1]
    return int(np.count_nonzero(
        active & (x >= x0) & (x < x1) & (y >= y0) & (y < y1)))


def density(positions: np.ndarray, active: np.ndarray,
            region: Region, geometry: Geometry) -> float:
    return count_inside(positions, active, region, geometry) / region.area(geometry)


@dataclass
class DensitySeries:
    times: list[float] = field(default_factory=list)
    rho: list[list[float]] = field(default_factory=list)       # (T, 4)
    n_active: list[int] = field(default_factory=list)
    n_status: list[list[int]] = field(default_factory=list)    # (T, 4) agents per status

    def append(self, t: float, rho: list[float], n_active: int,
               n_status: list[int]) -> None:
        self.times.append(t)
        self.rho.append(rho)
        self.n_active.append(n_active)
        self.n_status.append(n_status)

    def __len__(self) -> int:
        return len(self.times)

    def rho_array(self) -> np.ndarray:
        return np.asarray(self.rho, dtype=np.float64).reshape(len(self.times), 4)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(DENSITY_HEADER + "\n")
        for i, t in enumerate(self.times):
            rho = ",".join(f"{r:.6f}" for r in self.rho[i])
            ns = ",".join(str(c) for c in self.n_status[i])
            buf.write(f"{t:.3f},{rho},{self.n_active[i]},{ns}\n")
        return buf.getvalue()


def moving_average(x: np.ndarray, width: int) -> np.ndarray:
    """Centered moving average; edge windows shrink to what exists, so a
    constant series stays exactly constant and width 1 is the identity."""
    if width <= 1 or len(x) <= 1:
        return np.asarray(x, dtype=np.float64).copy()
    kernel = np.ones(width)
    num = np.convolve(x, kernel, mode="same")
    den = np.convolve(np.ones(len(x)), kernel, mode="same")
    return num / den


def series_stats(series: DensitySeries, smooth_width: int) -> list[dict[str, float]]:
    """Per-region {peak, t_peak, final}: peak of the smoothed series at
    its first attainment time, final from the raw last sample."""
    if len(series) == 0:
        raise ValueError("empty density series")
    times = np.asarray(series.times)
    rho = series.rho_array()
    out = []
    for r in range(4):
        smooth = moving_average(rho[:, r], smooth_width)
        i = int(np.argmax(smooth))
        out.append({
            "peak": float(smooth[i]),
            "t_peak": float(times[i]),
            "final": float(rho[-1, r]),
        })
    return out


def fluctuation_score(series: DensitySeries, smooth_width: int) -> float:
    """Sum over regions of the std of increments of the smoothed series;
    quantifies how jittery the density evolution is."""
    rho = series.rho_array()
    total = 0.0
    for r in range(4):
        smooth = moving_average(rho[:, r], smooth_width)
        if len(smooth) >= 2:
            total += float(np.std(np.diff(smooth)))
    return total
