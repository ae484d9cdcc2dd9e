"""Group decision state machine.

A moving group (status 1) drops into doubt (2) when its leader made no
meaningful forward progress over the trailing window, or when the
leader hits an active control point.  Doubt lasts a fixed time, then a
Bernoulli draw sends the group back out (3) or into the queue (4);
3 and 4 never change again.  All checks read only the leader's track:
followers never trigger transitions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Cip, Status


@dataclass
class Transition:
    t: float
    group_id: int
    old: int
    new: int
    cause: str  # stall | cip | split


class LeaderHistory:
    """Ring buffer of leader x-coordinates sampled every stride_steps.

    Sample s holds the positions at step s * stride_steps; capacity
    covers one full stall window plus slack.  Indexing is integral so
    window lookups never suffer float drift.
    """

    def __init__(self, n_groups: int, stride_steps: int, window_steps: int):
        self.stride = max(1, stride_steps)
        cap = max(4, window_steps // self.stride + 3) if window_steps >= 0 else 4
        self.xs = np.zeros((cap, n_groups), dtype=np.float64)
        self.last_sample = -1

    def maybe_record(self, step: int, leader_x: np.ndarray) -> None:
        if step % self.stride != 0:
            return
        s = step // self.stride
        self.xs[s % len(self.xs)] = leader_x
        self.last_sample = s

    def x_at_step(self, step: int) -> np.ndarray | None:
        """Positions at the retained sample nearest to `step`, or None
        if that part of the track was never recorded (warm-up)."""
        if self.last_sample < 0 or step < 0:
            return None
        s = (step + self.stride // 2) // self.stride  # nearest sample
        s = min(s, self.last_sample)
        if s < 0 or s <= self.last_sample - len(self.xs):
            return None
        return self.xs[s % len(self.xs)]


def stall_mask(history: LeaderHistory, step: int, window_steps: int,
               status: np.ndarray, leader_x_now: np.ndarray,
               stall_distance: float) -> np.ndarray:
    """Status-1 groups whose leader advanced <= stall_distance over the
    trailing window; all-false during warm-up or when disabled
    (window_steps < 0 encodes an infinite window)."""
    moving = status == int(Status.MOVING)
    if window_steps < 0 or step <= window_steps:
        return np.zeros_like(moving)
    x_then = history.x_at_step(step - window_steps)
    if x_then is None:
        return np.zeros_like(moving)
    return moving & (leader_x_now - x_then <= stall_distance)


def cip_triggered(prev_x: float, new_x: float, status: int, t: float,
                  cip: Cip, sweep_pending: bool) -> bool:
    """Reference single-leader rule: crossing while active, or the
    one-time announcement at activation reaching leaders already past."""
    if status != int(Status.MOVING) or t < cip.activation_time:
        return False
    if prev_x < cip.x_pos <= new_x:
        return True
    return sweep_pending and new_x >= cip.x_pos


def cip_hit_mask(status: np.ndarray, lead_prev_x: np.ndarray,
                 lead_new_x: np.ndarray, t: float, cips: list[Cip],
                 sweep_fired: list[bool], cip_sweep: bool) -> np.ndarray:
    """Groups informed by a control point this step.

    sweep_fired has one slot per CIP and is set in place the first step
    the CIP is active, implementing the exactly-once announcement.
    """
    moving = status == int(Status.MOVING)
    hit = np.zeros_like(moving)
    for i, cip in enumerate(cips):
        if t < cip.activation_time:
            continue
        hit |= moving & (lead_prev_x < cip.x_pos) & (lead_new_x >= cip.x_pos)
        if not sweep_fired[i]:
            if cip_sweep:
                hit |= moving & (lead_new_x >= cip.x_pos)
            sweep_fired[i] = True
    return hit


def update_statuses(status: np.ndarray, doubt_entered: np.ndarray, t: float,
                    stall: np.ndarray, cip_hit: np.ndarray,
                    doubt_duration: float, p_go_back: float,
                    rng: np.random.Generator) -> list[Transition]:
    """Apply one step of the state machine in place; returns the events.

    Both masks are evaluated against the pre-step statuses, so a group
    entering doubt now resolves no earlier than one step later.  Doubt
    resolutions draw from `rng` in ascending group-id order.
    """
    out: list[Transition] = []
    resolve = (status == int(Status.DOUBT)) & (t - doubt_entered >= doubt_duration)

    to_doubt = np.flatnonzero((status == int(Status.MOVING)) & (stall | cip_hit))
    for g in to_doubt:
        cause = "cip" if cip_hit[g] else "stall"
        out.append(Transition(t, int(g), int(Status.MOVING), int(Status.DOUBT), cause))
    status[to_doubt] = int(Status.DOUBT)
    doubt_entered[to_doubt] = t

    ids = np.flatnonzero(resolve)
    if len(ids):
        u = rng.random(len(ids))
        new = np.where(u < p_go_back / 100.0,
                       int(Status.GOING_BACK), int(Status.STAYING))
        status[ids] = new
        for g, s in zip(ids, new):
            out.append(Transition(t, int(g), int(Status.DOUBT), int(s), "split"))
    return out


def remove_exited(positions: np.ndarray, active: np.ndarray,
                  agent_status: np.ndarray, x_min: float) -> np.ndarray:
    """Deactivate going-back agents that reached the removal line."""
    mask = active & (agent_status == int(Status.GOING_BACK)) \
        & (positions[:, 0] <= x_min)
    ids = np.flatnonzero(mask)
    active[ids] = False
    return ids
