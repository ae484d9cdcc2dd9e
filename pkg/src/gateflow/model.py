"""Domain types shared by every module: statuses, geometry, model parameters.

Positions and velocities are plain float64 numpy arrays of shape (2,)
(or (n, 2) in bulk code); no wrapper class.  All distances are meters,
times seconds, velocities m/s.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import IntEnum

import numpy as np

Vec2 = np.ndarray  # shape (2,), float64, finite components


class ConfigError(ValueError):
    """Invalid scenario: bad value, unknown key, or broken invariant."""


class Status(IntEnum):
    """Group-level behavioural mode.

    Transitions only along MOVING -> DOUBT -> {GOING_BACK, STAYING};
    GOING_BACK and STAYING are absorbing.
    """

    MOVING = 1      # walking rightward towards the gate
    DOUBT = 2       # stopped, decision in progress
    GOING_BACK = 3  # walking leftward, will leave the corridor
    STAYING = 4     # queuing in the corridor


def vec2(x: float, y: float) -> Vec2:
    v = np.array([x, y], dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ConfigError(f"non-finite vector ({x}, {y})")
    return v


def default_repulsion_matrix() -> np.ndarray:
    """Status-pair repulsion gains, m²/s.

    Entry [i-1][j-1] is the gain felt by an agent whose group is in
    status i from its nearest stranger in status j (receiver row,
    exerter column).
    """
    return np.array(
        [
            [2.0, 2.5, 1.0, 2.5],
            [2.0, 2.0, 2.0, 2.0],
            [0.75, 0.75, 0.75, 0.75],
            [2.0, 2.0, 0.75, 4.5],
        ],
        dtype=np.float64,
    )


@dataclass
class Agent:
    """Snapshot record of one pedestrian (bulk state lives in engine arrays).

    history holds (time, x) samples of the leader track; None for followers.
    """

    id: int
    position: Vec2
    group_id: int
    is_leader: bool
    active: bool = True
    history: list[tuple[float, float]] | None = None


@dataclass
class Group:
    id: int
    member_ids: list[int]
    leader_id: int
    status: Status = Status.MOVING
    doubt_entered_at: float | None = None


@dataclass
class Geometry:
    """Corridor [0, length] x [0, height] plus the staging strip left of 0.

    The left edge x_min is the removal line for leaving agents; it is
    derived from the initial placement when not set explicitly.  The
    right end is a solid wall only while gate_closed.
    """

    length: float = 130.0
    height: float = 10.0
    x_min: float | None = None
    gate_closed: bool = True

    def validate(self) -> None:
        if not (self.length > 0 and self.height > 0):
            raise ConfigError("corridor_length and corridor_height must be > 0")
        if self.x_min is not None and self.x_min > 0:
            raise ConfigError(f"x_min must be <= 0, got {self.x_min}")


@dataclass
class ModelParams:
    dt: float = 0.01                # Euler time step, s
    stall_window: float = 7.0       # no-progress window triggering doubt, s (inf disables)
    stall_distance: float = 1.5     # max forward progress still counting as stalled, m
    doubt_duration: float = 10.0    # fixed length of the doubt phase, s
    p_go_back: float = 25.0         # percent of groups that leave after doubting
    # Desired velocity per status, row index = status - 1.
    v_desired: np.ndarray = field(
        default_factory=lambda: np.array(
            [[1.0, 0.0], [0.0, 0.0], [-1.2, 0.0], [0.5, 0.0]], dtype=np.float64
        )
    )
    repulsion_in: float = 1.0       # gain from nearest group mate, m²/s (calibrated, not from paper)
    attraction: float = 0.1         # pull towards the group leader, 1/s (calibrated, not from paper)
    repulsion_matrix: np.ndarray = field(default_factory=default_repulsion_matrix)
    wall_gain: float = 0.5          # wall repulsion gain, m²/s (calibrated, not from paper)
    d_min: float = 0.2              # proximity floor capping 1/d terms, m (calibrated)
    d_wall: float = 0.5             # wall repulsion cutoff distance, m (calibrated)

    def validate(self) -> None:
        if not self.dt > 0:
            raise ConfigError("dt must be > 0")
        if not self.stall_window > 0:
            raise ConfigError("stall_window must be > 0 (use inf to disable)")
        for name in ("stall_distance", "doubt_duration", "repulsion_in",
                     "attraction", "wall_gain", "d_min", "d_wall"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if not 0.0 <= self.p_go_back <= 100.0:
            raise ConfigError(f"p_go_back must be in [0, 100], got {self.p_go_back}")
        if self.v_desired.shape != (4, 2) or not np.all(np.isfinite(self.v_desired)):
            raise ConfigError("v_desired must be four finite 2-vectors")
        m = self.repulsion_matrix
        if m.shape != (4, 4) or not np.all(np.isfinite(m)):
            raise ConfigError("repulsion_matrix must be a finite 4x4 matrix")
        if np.any(m < 0):
            raise ConfigError("repulsion_matrix entries must be >= 0")
        # Row 3 (going-back receivers) is uniform: leaving agents accept
        # closeness to everyone equally.
        if not np.all(m[2] == m[2, 0]):
            raise ConfigError("repulsion_matrix row 3 must have equal entries")


@dataclass
class Cip:
    """Control & Information Point: from activation_time on, any moving
    group whose leader crosses x_pos switches straight into doubt."""

    x_pos: float
    activation_time: float = 0.0


@dataclass
class Scenario:
    n: int = 1200
    seed: int = 1
    t_end: float = 600.0
    geometry: Geometry = field(default_factory=Geometry)
    params: ModelParams = field(default_factory=ModelParams)
    cips: list[Cip] = field(default_factory=list)
    cip_sweep: bool = True          # announce an activating CIP to leaders already past it
    cell_size: float = 2.0          # neighbor grid cell, m
    history_stride: float = 0.1     # leader position sampling period, s
    initial_density: float = 0.8    # persons/m² at placement
    front_offset: float = 10.0      # gap between placement front and the gate, m
    region_side: float = 10.0       # monitoring square side, m
    sample_stride: float = 1.0      # density sampling period, s
    smooth_width: int = 5           # moving-average window, samples
    stop_speed: float = 0.05        # early-stop speed threshold, m/s
    stop_hold: float = 10.0         # early-stop hold time, s
    frame_stride: int = 0           # steps between frame dumps, 0 = off

    def validate(self) -> None:
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit an unsigned 64-bit integer")
        if not self.t_end > 0:
            raise ConfigError("t_end must be > 0")
        self.geometry.validate()
        self.params.validate()
        for c in self.cips:
            if not 0.0 <= c.x_pos <= self.geometry.length:
                raise ConfigError(f"CIP position {c.x_pos} outside [0, L]")
            if c.activation_time < 0:
                raise ConfigError(f"CIP activation time {c.activation_time} < 0")
        for name in ("cell_size", "history_stride", "initial_density",
                     "region_side", "sample_stride", "stop_speed", "stop_hold"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0")
        if self.front_offset < 0:
            raise ConfigError("front_offset must be >= 0")
        if self.smooth_width < 1:
            raise ConfigError("smooth_width must be >= 1")
        if self.frame_stride < 0:
            raise ConfigError("frame_stride must be >= 0")

    def clone(self) -> "Scenario":
        """Independent deep copy (arrays and CIP list included)."""
        return replace(
            self,
            geometry=replace(self.geometry),
            params=replace(
                self.params,
                v_desired=self.params.v_desired.copy(),
                repulsion_matrix=self.params.repulsion_matrix.copy(),
            ),
            cips=[replace(c) for c in self.cips],
        )


def default_scenario() -> Scenario:
    """Reference setup: 1200 agents, 130 m x 10 m corridor, gate closing at t=0."""
    return Scenario()


def staging_left_edge(n: int, geometry: Geometry, initial_density: float,
                      front_offset: float) -> tuple[float, float]:
    """Return (block_left, x_min) for the initial placement.

    The crowd occupies a block of width n / (density * height) ending
    front_offset before the gate; when the block does not fit the
    corridor it extends into the staging strip left of x = 0.  The
    removal line sits 5 m left of whichever is smaller, block start
    or 0.
    """
    width = n / (initial_density * geometry.height)
    front = geometry.length - front_offset
    block_left = front - width
    return block_left, min(0.0, block_left) - 5.0


STATUS_NAMES = {s: s.name.lower() for s in Status}

TRANSITIONS_ALLOWED = {
    (Status.MOVING, Status.DOUBT),
    (Status.DOUBT, Status.GOING_BACK),
    (Status.DOUBT, Status.STAYING),
}
