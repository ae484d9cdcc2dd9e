"""Scenario initialization, the main step loop, and run bookkeeping.

One step: build the neighbor index, evaluate velocities against that
frozen snapshot, integrate, then run the decision state machine, remove
agents that walked out, and sample probes on their strides.  Everything
random flows through one seeded generator in a fixed call order, so a
(scenario, seed) pair reproduces every output byte.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import behavior, probes
from .behavior import LeaderHistory, Transition
from .forces import euler_step, velocities_bulk
from .grid import build_index, nearest_inside_bulk, nearest_outside_bulk
from .model import Scenario, Status, staging_left_edge


class NumericError(RuntimeError):
    """A velocity or position turned non-finite (aborts the run)."""


@dataclass
class Population:
    positions: np.ndarray       # (n, 2)
    active: np.ndarray          # (n,) bool
    group_of: np.ndarray        # (n,) group index per agent
    is_leader: np.ndarray       # (n,) bool
    leader_of: np.ndarray       # (n,) own leader's agent id
    leader_ids: np.ndarray      # (n_groups,)
    members: np.ndarray         # (n_groups, max_size) agent ids, -1 padding
    g_status: np.ndarray        # (n_groups,) current status per group
    doubt_entered: np.ndarray   # (n_groups,) time of the 1->2 transition

    @property
    def n_groups(self) -> int:
        return len(self.leader_ids)


def draw_group_sizes(n: int, rng: np.random.Generator) -> list[int]:
    """Sizes uniform in {2..6} until they sum to n; the last group takes
    the remainder, and a remainder of 1 merges into the previous group
    (sizes never exceed 7)."""
    sizes: list[int] = []
    total = 0
    while total < n:
        left = n - total
        if left == 1:
            sizes[-1] += 1
            total += 1
            continue
        s = min(int(rng.integers(2, 7)), left)
        sizes.append(s)
        total += s
    return sizes


def init_population(sc: Scenario, rng: np.random.Generator) -> Population:
    """Place groups in a block of the configured density ending
    front_offset before the gate; resolves geometry.x_min when unset."""
    geo = sc.geometry
    block_left, x_min = staging_left_edge(sc.n, geo, sc.initial_density,
                                          sc.front_offset)
    if geo.x_min is None:
        geo.x_min = x_min

    sizes = draw_group_sizes(sc.n, rng)
    g = len(sizes)
    x_front = geo.length - sc.front_offset
    centers = rng.random((g, 2))
    centers[:, 0] = block_left + centers[:, 0] * (x_front - block_left)
    centers[:, 1] *= geo.height

    # Members uniform in a unit disc around their group center.
    u = rng.random((sc.n, 2))
    radius = np.sqrt(u[:, 0])
    angle = 2.0 * np.pi * u[:, 1]
    offsets = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1)

    group_of = np.repeat(np.arange(g), sizes)
    positions = centers[group_of] + offsets
    np.clip(positions[:, 1], 0.0, geo.height, out=positions[:, 1])
    np.minimum(positions[:, 0], geo.length, out=positions[:, 0])

    starts = np.zeros(g, dtype=np.int64)
    np.cumsum(sizes[:-1], out=starts[1:])
    leader_ids = starts  # first member leads and never changes
    is_leader = np.zeros(sc.n, dtype=bool)
    is_leader[leader_ids] = True

    members = np.full((g, max(sizes)), -1, dtype=np.int64)
    for gi, (s0, sz) in enumerate(zip(starts, sizes)):
        members[gi, :sz] = np.arange(s0, s0 + sz)

    return Population(
        positions=positions,
        active=np.ones(sc.n, dtype=bool),
        group_of=group_of,
        is_leader=is_leader,
        leader_of=leader_ids[group_of],
        leader_ids=leader_ids,
        members=members,
        g_status=np.full(g, int(Status.MOVING), dtype=np.int64),
        doubt_entered=np.full(g, np.inf),
    )


@dataclass
class RunResult:
    scenario: Scenario          # resolved copy (x_min filled in)
    series: probes.DensitySeries
    transitions: list[Transition]
    removed_total: int
    pop: Population             # final state
    frames: list[tuple[int, float, np.ndarray]] = field(default_factory=list)
    wall_clock: float = 0.0
    steps: int = 0

    def agent_status(self) -> np.ndarray:
        return self.pop.g_status[self.pop.group_of]


def _frame_rows(pop: Population, agent_status: np.ndarray) -> np.ndarray:
    """Active agents as rows of (id, group, status, x, y, is_leader)."""
    ids = np.flatnonzero(pop.active)
    return np.column_stack([
        ids,
        pop.group_of[ids],
        agent_status[ids],
        pop.positions[ids, 0],
        pop.positions[ids, 1],
        pop.is_leader[ids].astype(np.int64),
    ])


def run(scenario: Scenario) -> RunResult:
    """Simulate from gate closure (t = 0) to t_end or early equilibrium.

    Early stop: no moving/doubting/leaving agents remain and the top
    realized displacement per step among active agents stays under
    stop_speed for stop_hold consecutive seconds.  Displacement is
    measured after wall clamping, so agents pressing a closed gate
    count as settled even though their commanded velocity is not zero.
    Frames are collected every scenario.frame_stride steps when that
    stride is nonzero.
    """
    t_start = time.perf_counter()
    sc = scenario.clone()
    sc.validate()
    rng = np.random.default_rng(sc.seed)
    pop = init_population(sc, rng)
    geo, par = sc.geometry, sc.params

    dt = par.dt
    n_steps = round(sc.t_end / dt)
    s_stride = max(1, round(sc.sample_stride / dt))
    h_stride = max(1, round(sc.history_stride / dt))
    win_steps = -1 if math.isinf(par.stall_window) else round(par.stall_window / dt)
    hold_steps = max(1, round(sc.stop_hold / dt))
    frame_stride = sc.frame_stride
    regions = probes.default_regions(geo.length, geo.height, sc.region_side)

    history = LeaderHistory(pop.n_groups, h_stride, win_steps)
    sweep_fired = [False] * len(sc.cips)
    series = probes.DensitySeries()
    transitions: list[Transition] = []
    frames: list[tuple[int, float, np.ndarray]] = []
    removed_total = 0
    hold = 0
    stop2 = (sc.stop_speed * dt) ** 2  # compared against squared step displacement
    prev_pos = np.empty_like(pop.positions)
    last_sampled = -1

    def sample(t: float, agent_status: np.ndarray) -> None:
        rho = [probes.density(pop.positions, pop.active, r, geo) for r in regions]
        counts = np.bincount(agent_status[pop.active], minlength=5)[1:5]
        series.append(t, rho, int(pop.active.sum()), [int(c) for c in counts])

    final_step = n_steps
    for step in range(n_steps):
        agent_status = pop.g_status[pop.group_of]
        if step % s_stride == 0:
            sample(step * dt, agent_status)
            last_sampled = step
        history.maybe_record(step, pop.positions[pop.leader_ids, 0])

        index = build_index(pop.positions, pop.active, pop.group_of, sc.cell_size)
        outside = nearest_outside_bulk(index)
        inside = nearest_inside_bulk(pop.positions, pop.active, pop.members)
        # extreme gains may overflow to inf; the isfinite check below is
        # the real detector, so keep numpy quiet about the intermediate
        with np.errstate(over="ignore", invalid="ignore"):
            v = velocities_bulk(pop.positions, pop.active, agent_status,
                                pop.is_leader, pop.positions[pop.leader_of],
                                outside, inside, par, geo)
        if not np.isfinite(v).all():
            bad = int((~np.isfinite(v).all(axis=1)).sum())
            raise NumericError(
                f"non-finite velocity for {bad} agent(s) at t={step * dt:.3f}")

        np.copyto(prev_pos, pop.positions)
        euler_step(pop.positions, v, pop.active, dt, geo)
        t_new = (step + 1) * dt
        # an open gate removes the right clamp, so runaway gains can push
        # positions beyond any physical scale; stop before the index
        # tries to grid an astronomically wide domain
        span = float(np.abs(pop.positions[pop.active]).max(initial=0.0))
        if span > 1e9:
            raise NumericError(
                f"positions diverged (|x| up to {span:.3g} m) at t={t_new:.3f}")

        lead_x = pop.positions[pop.leader_ids, 0]
        stall = behavior.stall_mask(history, step + 1, win_steps,
                                    pop.g_status, lead_x, par.stall_distance)
        cip_hit = behavior.cip_hit_mask(pop.g_status, prev_pos[pop.leader_ids, 0],
                                        lead_x, t_new, sc.cips, sweep_fired,
                                        sc.cip_sweep)
        transitions.extend(behavior.update_statuses(
            pop.g_status, pop.doubt_entered, t_new, stall, cip_hit,
            par.doubt_duration, par.p_go_back, rng))

        agent_status = pop.g_status[pop.group_of]
        removed_total += len(behavior.remove_exited(
            pop.positions, pop.active, agent_status, geo.x_min))

        if frame_stride and (step + 1) % frame_stride == 0:
            frames.append((step + 1, t_new, _frame_rows(pop, agent_status)))

        counts = np.bincount(agent_status[pop.active], minlength=5)
        settled = counts[1] + counts[2] + counts[3] == 0
        if settled:
            disp2 = ((pop.positions - prev_pos) ** 2).sum(axis=1)
            settled = float(disp2[pop.active].max(initial=0.0)) < stop2
        if settled:
            hold += 1
            if hold >= hold_steps:
                final_step = step + 1
                break
        else:
            hold = 0

    agent_status = pop.g_status[pop.group_of]
    if last_sampled != final_step and (
            len(series) == 0 or series.times[-1] < final_step * dt):
        sample(final_step * dt, agent_status)

    return RunResult(
        scenario=sc,
        series=series,
        transitions=transitions,
        removed_total=removed_total,
        pop=pop,
        frames=frames,
        wall_clock=time.perf_counter() - t_start,
        steps=final_step,
    )
