"""Neighbor index: frozen examples, tie-breaks, brute-force oracle parity."""

import numpy as np
import pytest

from gateflow import grid
from gateflow.grid import build_index, nearest_inside_bulk, nearest_outside_bulk


# ---------------------------------------------------------------- oracles

def brute_outside(positions, active, group_of):
    """Dense O(n^2) reference: lexicographic (distance^2, id) minimum."""
    n = len(positions)
    out = np.full(n, -1, dtype=np.int64)
    act = np.flatnonzero(active)
    for k in act:
        stranger = act[group_of[act] != group_of[k]]
        stranger = stranger[stranger != k]
        if len(stranger) == 0:
            continue
        d = positions[stranger] - positions[k]
        d2 = d[:, 0] ** 2 + d[:, 1] ** 2
        out[k] = stranger[np.lexsort((stranger, d2))[0]]
    return out


def brute_inside(positions, active, group_of):
    n = len(positions)
    out = np.full(n, -1, dtype=np.int64)
    for k in np.flatnonzero(active):
        mates = np.flatnonzero(active & (group_of == group_of[k]))
        mates = mates[mates != k]
        if len(mates) == 0:
            continue
        d = positions[mates] - positions[k]
        d2 = d[:, 0] ** 2 + d[:, 1] ** 2
        out[k] = mates[np.lexsort((mates, d2))[0]]
    return out


def random_config(rng):
    """Clustered, duplicated, partially inactive population."""
    n = int(rng.integers(2, 500))
    span = float(rng.choice([3.0, 30.0, 130.0]))
    pos = rng.random((n, 2)) * span
    if rng.random() < 0.5:  # pack half the agents into a dense pocket
        half = n // 2
        pos[:half] = pos[:half] * 0.02 + rng.random(2) * span
    dup = rng.integers(0, n, size=max(1, n // 10))
    pos[dup] = pos[rng.integers(0, n, size=len(dup))]  # exact ties
    group_of = np.zeros(n, dtype=np.int64)
    g = start = 0
    while start < n:
        size = int(rng.integers(1, 7))
        group_of[start:start + size] = g
        start += size
        g += 1
    active = rng.random(n) > 0.15
    members = np.full((g, 7), -1, dtype=np.int64)
    for gi in range(g):
        ids = np.flatnonzero(group_of == gi)
        members[gi, :len(ids)] = ids
    cell = float(rng.choice([0.5, 2.0, 10.0]))
    return pos, active, group_of, members, cell


# ---------------------------------------------------------- frozen cases

def test_two_candidate_example():
    # stranger at 0.707 m beats nothing else; the group mate is excluded
    pos = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.5]])
    active = np.ones(3, dtype=bool)
    group_of = np.array([0, 0, 1])
    idx = build_index(pos, active, group_of, 2.0)
    assert idx.nearest_outside_group(0) == 2
    assert idx.nearest_inside_group(0) == 1


def test_all_same_group_has_no_stranger():
    pos = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    idx = build_index(pos, np.ones(3, bool), np.zeros(3, np.int64), 2.0)
    assert idx.nearest_outside_group(1) is None


def test_sole_survivor_has_no_mate():
    pos = np.array([[0.0, 0.0], [3.0, 0.0]])
    active = np.array([True, False])
    idx = build_index(pos, active, np.zeros(2, np.int64), 2.0)
    assert idx.nearest_inside_group(0) is None
    members = np.array([[0, 1, -1]], dtype=np.int64)
    got = nearest_inside_bulk(pos, active, members)
    assert got.tolist() == [-1, -1]


def test_mate_at_three_meters():
    pos = np.array([[0.0, 0.0], [3.0, 0.0]])
    idx = build_index(pos, np.ones(2, bool), np.zeros(2, np.int64), 2.0)
    assert idx.nearest_inside_group(0) == 1
    assert idx.nearest_inside_group(1) == 0


def test_single_agent_and_empty_index():
    pos = np.array([[5.0, 5.0]])
    idx = build_index(pos, np.ones(1, bool), np.zeros(1, np.int64), 2.0)
    assert idx.nearest_outside_group(0) is None
    assert nearest_outside_bulk(idx).tolist() == [-1]
    idx0 = build_index(pos, np.zeros(1, bool), np.zeros(1, np.int64), 2.0)
    assert idx0.size == 0
    assert nearest_outside_bulk(idx0).tolist() == [-1]


def test_query_for_inactive_agent_raises():
    pos = np.zeros((2, 2))
    active = np.array([True, False])
    idx = build_index(pos, active, np.array([0, 1]), 2.0)
    with pytest.raises(ValueError):
        idx.nearest_outside_group(1)


def test_tie_breaks_by_lowest_id():
    # two strangers at exactly 1 m on either side
    pos = np.array([[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0]])
    group_of = np.array([0, 1, 2])
    idx = build_index(pos, np.ones(3, bool), group_of, 0.5)
    assert idx.nearest_outside_group(0) == 1
    assert nearest_outside_bulk(idx)[0] == 1
    # coincident strangers: same distance 0, lowest id wins
    pos = np.array([[2.0, 2.0], [2.0, 2.0], [2.0, 2.0]])
    idx = build_index(pos, np.ones(3, bool), group_of, 2.0)
    assert idx.nearest_outside_group(2) == 0
    assert nearest_outside_bulk(idx).tolist() == [1, 0, 0]


def test_tie_across_ring_boundary():
    # both candidates 4 m out but in different rings of a 0.5 m grid;
    # the scan must not stop before confirming the lower id
    pos = np.array([[0.0, 0.0], [4.0, 0.0], [0.0, 4.0], [-4.0, 0.0]])
    group_of = np.array([0, 1, 2, 3])
    idx = build_index(pos, np.ones(4, bool), group_of, 0.5)
    assert idx.nearest_outside_group(0) == 1
    assert nearest_outside_bulk(idx)[0] == 1


def test_count_conservation():
    rng = np.random.default_rng(7)
    pos = rng.random((1200, 2)) * [130.0, 10.0]
    active = rng.random(1200) > 0.3
    idx = build_index(pos, active, np.arange(1200) // 4, 2.0)
    assert idx.size == active.sum()
    counts = np.diff(idx.offsets)
    assert counts.sum() == active.sum()
    assert sorted(idx.sorted_ids) == sorted(np.flatnonzero(active))


# ------------------------------------------------------- oracle property

def test_oracle_parity_many_random_configs():
    rng = np.random.default_rng(20260813)
    for trial in range(110):
        pos, active, group_of, members, cell = random_config(rng)
        idx = build_index(pos, active, group_of, cell)
        want_out = brute_outside(pos, active, group_of)
        want_in = brute_inside(pos, active, group_of)
        got_out = nearest_outside_bulk(idx)
        got_in = nearest_inside_bulk(pos, active, members)
        assert np.array_equal(got_out, want_out), f"outside, trial {trial}"
        assert np.array_equal(got_in, want_in), f"inside, trial {trial}"
        # spot-check the per-agent query path against the same oracle
        act = np.flatnonzero(active)
        for k in act[rng.integers(0, len(act), size=min(8, len(act)))]:
            one = idx.nearest_outside_group(int(k))
            assert (one if one is not None else -1) == want_out[k]
            one = idx.nearest_inside_group(int(k))
            assert (one if one is not None else -1) == want_in[k]


def test_numpy_fallback_matches_compiled_path(monkeypatch):
    rng = np.random.default_rng(99)
    for _ in range(25):
        pos, active, group_of, members, cell = random_config(rng)
        idx = build_index(pos, active, group_of, cell)
        fast_out = nearest_outside_bulk(idx)
        fast_in = nearest_inside_bulk(pos, active, members)
        monkeypatch.setattr(grid, "HAVE_NUMBA", False)
        slow_out = nearest_outside_bulk(idx)
        slow_in = nearest_inside_bulk(pos, active, members)
        monkeypatch.undo()
        assert np.array_equal(fast_out, slow_out)
        assert np.array_equal(fast_in, slow_in)
