"""Velocity law and explicit Euler integration.

Every active agent moves with the sum of five terms: desired velocity
for its group status, inverse-distance repulsion from the nearest
stranger (gain from the status-pair matrix), and for followers only,
inverse-distance repulsion from the nearest group mate plus a linear
pull towards the leader; walls repel within a short cutoff.  The
per-agent `agent_velocity` is the reference implementation; the engine
uses the vectorized `velocities_bulk`, which must match it exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Geometry, ModelParams, Status, Vec2

_ZERO = np.zeros(2)


@dataclass
class VelocityTerms:
    """Diagnostic decomposition; total() is what the integrator sees."""

    v_desired: Vec2
    v_repel_in: Vec2
    v_repel_out: Vec2
    v_attract: Vec2
    v_obstacle: Vec2

    def total(self) -> Vec2:
        return (self.v_desired + self.v_repel_in + self.v_repel_out
                + self.v_attract + self.v_obstacle)


def desired_velocity(status: Status | int, params: ModelParams) -> Vec2:
    return params.v_desired[int(status) - 1].copy()


def repulsion(x_k: Vec2, x_other: Vec2, gain: float, d_min: float) -> Vec2:
    """-gain * (x_other - x_k) / max(|x_other - x_k|^2, d_min^2).

    The form self-caps at gain/d_min.  Coincident points take direction
    (1, 0) at the cap instead of dividing zero by zero.
    """
    d = x_other - x_k
    d2 = float(d[0] * d[0] + d[1] * d[1])
    if d2 == 0.0:
        return np.array([-gain / d_min, 0.0])
    return -gain / max(d2, d_min * d_min) * d


def attraction_to_leader(x_k: Vec2, x_leader: Vec2, attraction: float) -> Vec2:
    return attraction * (x_leader - x_k)


def wall_repulsion(x: Vec2, geometry: Geometry, wall_gain: float,
                   d_wall: float, d_min: float) -> Vec2:
    """Inward push from y=0, y=H, and x=L (gate closed) within d_wall."""
    out = np.zeros(2)
    d_bottom = max(float(x[1]), 0.0)
    if d_bottom < d_wall:
        out[1] += wall_gain / max(d_bottom, d_min)
    d_top = max(geometry.height - float(x[1]), 0.0)
    if d_top < d_wall:
        out[1] -= wall_gain / max(d_top, d_min)
    if geometry.gate_closed:
        d_gate = max(geometry.length - float(x[0]), 0.0)
        if d_gate < d_wall:
            out[0] -= wall_gain / max(d_gate, d_min)
    return out


def agent_velocity(x_k: Vec2, status: Status | int, is_leader: bool,
                   x_outside: Vec2 | None, status_outside: Status | int | None,
                   x_inside: Vec2 | None, x_leader: Vec2 | None,
                   params: ModelParams, geometry: Geometry) -> VelocityTerms:
    """Reference velocity law for one agent; None inputs contribute zero.

    x_outside/status_outside: nearest stranger and its group status;
    x_inside: nearest group mate (followers only); x_leader: own leader
    position (followers only; the last known position if the leader was
    removed).
    """
    st = int(status)
    v_out = _ZERO
    if x_outside is not None:
        gain = float(params.repulsion_matrix[st - 1, int(status_outside) - 1])
        v_out = repulsion(x_k, x_outside, gain, params.d_min)
    v_in = _ZERO
    v_att = _ZERO
    if not is_leader:
        if x_inside is not None:
            v_in = repulsion(x_k, x_inside, params.repulsion_in, params.d_min)
        if x_leader is not None:
            v_att = attraction_to_leader(x_k, x_leader, params.attraction)
    return VelocityTerms(
        v_desired=desired_velocity(st, params),
        v_repel_in=v_in,
        v_repel_out=v_out,
        v_attract=v_att,
        v_obstacle=wall_repulsion(x_k, geometry, params.wall_gain,
                                  params.d_wall, params.d_min),
    )


def velocities_bulk(positions: np.ndarray, active: np.ndarray,
                    status_of: np.ndarray, is_leader: np.ndarray,
                    leader_pos: np.ndarray, outside_ids: np.ndarray,
                    inside_ids: np.ndarray, params: ModelParams,
                    geometry: Geometry) -> np.ndarray:
    """Velocity of every agent (zero rows for inactive agents).

    status_of: per-agent group status (1..4); leader_pos: per-agent
    position of the own group's leader; outside_ids/inside_ids: nearest
    neighbor ids with -1 for none.
    """
    n = len(positions)
    act = active.astype(np.float64)[:, None]
    st_row = status_of - 1

    v = params.v_desired[st_row] * act

    d_min2 = params.d_min * params.d_min
    for ids, gains, follower_only in (
        (outside_ids, params.repulsion_matrix[st_row, status_of[np.maximum(outside_ids, 0)] - 1], False),
        (inside_ids, np.full(n, params.repulsion_in), True),
    ):
        has = active & (ids >= 0)
        if follower_only:
            has &= ~is_leader
        j = np.maximum(ids, 0)
        d = positions[j] - positions
        d2 = d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1]
        denom = np.maximum(d2, d_min2)
        term = -(gains / denom)[:, None] * d
        coincident = has & (d2 == 0.0)
        term[coincident] = 0.0
        term[coincident, 0] = -gains[coincident] / params.d_min
        v += np.where(has[:, None], term, 0.0)

    foll = active & ~is_leader
    v += np.where(foll[:, None],
                  params.attraction * (leader_pos - positions), 0.0)

    x, y = positions[:, 0], positions[:, 1]
    wall = np.zeros_like(positions)
    d_bottom = np.maximum(y, 0.0)
    wall[:, 1] += np.where(d_bottom < params.d_wall,
                           params.wall_gain / np.maximum(d_bottom, params.d_min), 0.0)
    d_top = np.maximum(geometry.height - y, 0.0)
    wall[:, 1] -= np.where(d_top < params.d_wall,
                           params.wall_gain / np.maximum(d_top, params.d_min), 0.0)
    if geometry.gate_closed:
        d_gate = np.maximum(geometry.length - x, 0.0)
        wall[:, 0] -= np.where(d_gate < params.d_wall,
                               params.wall_gain / np.maximum(d_gate, params.d_min), 0.0)
    v += wall * act
    return v


def euler_step(positions: np.ndarray, velocities: np.ndarray,
               active: np.ndarray, dt: float, geometry: Geometry) -> None:
    """Advance active agents in place, then clamp to the solid boundaries.

    y stays in [0, H]; x stays at or below L while the gate is closed
    and at or above x_min (the removal line) always.
    """
    positions[active] += dt * velocities[active]
    np.clip(positions[:, 1], 0.0, geometry.height, out=positions[:, 1])
    if geometry.gate_closed:
        np.minimum(positions[:, 0], geometry.length, out=positions[:, 0])
    if geometry.x_min is not None:
        np.maximum(positions[:, 0], geometry.x_min, out=positions[:, 0])
