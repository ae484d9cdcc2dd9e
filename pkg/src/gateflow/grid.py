"""Uniform-grid neighbor index for the two per-step topological queries:
nearest active agent outside the group and nearest active group mate.

The grid stores active agents in cell-major CSR buckets (ascending id
inside each cell).  Per-agent queries use an expanding ring scan whose
stop rule guarantees exactness; the engine uses the bulk paths below —
compiled ring scans when numba is importable, else vectorized numpy.
All paths compute identical results: same float arithmetic, ties broken
to the lowest agent id, independent of build order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap

_NO_NEIGHBOR = -1


@dataclass
class NeighborIndex:
    cell: float
    origin: np.ndarray        # (2,) lower-left corner of cell (0, 0)
    nx: int
    ny: int
    offsets: np.ndarray       # (nx*ny + 1,) CSR cell boundaries
    sorted_ids: np.ndarray    # (n_active,) global ids, cell-major
    positions: np.ndarray     # (n, 2) borrowed, must not mutate while queried
    group_of: np.ndarray      # (n,) borrowed
    active: np.ndarray        # (n,) bool, borrowed

    @property
    def size(self) -> int:
        return len(self.sorted_ids)

    def _cell_of(self, pos: np.ndarray) -> tuple[int, int]:
        cx = int((pos[0] - self.origin[0]) // self.cell)
        cy = int((pos[1] - self.origin[1]) // self.cell)
        return min(max(cx, 0), self.nx - 1), min(max(cy, 0), self.ny - 1)

    def _bucket(self, cx: int, cy: int) -> np.ndarray:
        c = cx * self.ny + cy
        return self.sorted_ids[self.offsets[c]:self.offsets[c + 1]]

    def _ring(self, cx: int, cy: int, r: int):
        """Cells at Chebyshev distance exactly r, clipped to the grid."""
        if r == 0:
            if 0 <= cx < self.nx and 0 <= cy < self.ny:
                yield cx, cy
            return
        for x in range(cx - r, cx + r + 1):
            if 0 <= x < self.nx:
                if 0 <= cy - r < self.ny:
                    yield x, cy - r
                if 0 <= cy + r < self.ny:
                    yield x, cy + r
        for y in range(cy - r + 1, cy + r):
            if 0 <= y < self.ny:
                if 0 <= cx - r < self.nx:
                    yield cx - r, y
                if 0 <= cx + r < self.nx:
                    yield cx + r, y

    def _nearest(self, k: int, same_group: bool) -> int | None:
        if not self.active[k]:
            raise ValueError(f"neighbor query for inactive agent {k}")
        if self.size <= 1:
            return None
        pk = self.positions[k]
        gk = self.group_of[k]
        cx, cy = self._cell_of(pk)
        best_id = _NO_NEIGHBOR
        best_d2 = np.inf
        # After scanning rings 0..r-1, every unscanned candidate is at
        # least (r-1)*cell away; strict inequality keeps id tie-breaks
        # exact even when a tie straddles the scanned boundary.
        for r in range(max(self.nx, self.ny) + 1):
            bound = (r - 1) * self.cell
            if best_id != _NO_NEIGHBOR and bound > 0 and best_d2 < bound * bound:
                break
            for bx, by in self._ring(cx, cy, r):
                ids = self._bucket(bx, by)
                if len(ids) == 0:
                    continue
                if same_group:
                    ids = ids[(self.group_of[ids] == gk) & (ids != k)]
                else:
                    ids = ids[self.group_of[ids] != gk]
                if len(ids) == 0:
                    continue
                d = self.positions[ids] - pk
                d2 = d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1]
                j = int(np.argmin(d2))  # first minimum = lowest id (ids ascend)
                if d2[j] < best_d2 or (d2[j] == best_d2 and ids[j] < best_id):
                    best_d2 = float(d2[j])
                    best_id = int(ids[j])
        return None if best_id == _NO_NEIGHBOR else best_id

    def nearest_outside_group(self, k: int) -> int | None:
        """Nearest active agent in a different group; None if no stranger."""
        return self._nearest(k, same_group=False)

    def nearest_inside_group(self, k: int) -> int | None:
        """Nearest active group mate; None if k is the sole member left."""
        return self._nearest(k, same_group=True)


def build_index(positions: np.ndarray, active: np.ndarray,
                group_of: np.ndarray, cell_size: float) -> NeighborIndex:
    if cell_size <= 0:
        raise ValueError("cell_size must be > 0")
    ids = np.flatnonzero(active)
    if len(ids) == 0:
        return NeighborIndex(cell_size, np.zeros(2), 1, 1,
                             np.zeros(2, dtype=np.int64),
                             ids.astype(np.int64), positions, group_of, active)
    pts = positions[ids]
    origin = pts.min(axis=0)
    span = pts.max(axis=0) - origin
    nx = int(span[0] // cell_size) + 1
    ny = int(span[1] // cell_size) + 1
    cx = np.clip(((pts[:, 0] - origin[0]) // cell_size).astype(np.int64), 0, nx - 1)
    cy = np.clip(((pts[:, 1] - origin[1]) // cell_size).astype(np.int64), 0, ny - 1)
    flat = cx * ny + cy
    order = np.argsort(flat, kind="stable")  # keeps ascending id inside cells
    counts = np.bincount(flat, minlength=nx * ny)
    offsets = np.zeros(nx * ny + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return NeighborIndex(cell_size, origin.astype(np.float64), nx, ny,
                         offsets, ids[order], positions, group_of, active)


@njit(cache=True)
def _scan_cell(c, xk, yk, gk, pos, grp, sorted_ids, offsets,
               best_d2, best_id):  # pragma: no cover - compiled
    for t in range(offsets[c], offsets[c + 1]):
        j = sorted_ids[t]
        if grp[j] == gk:
            continue
        dx = pos[j, 0] - xk
        dy = pos[j, 1] - yk
        d2 = dx * dx + dy * dy
        if d2 < best_d2 or (d2 == best_d2 and j < best_id):
            best_d2 = d2
            best_id = j
    return best_d2, best_id


@njit(cache=True)
def _outside_kernel(pos, grp, sorted_ids, offsets, ox, oy, cell,
                    nx, ny, out):  # pragma: no cover - compiled
    max_r = nx if nx > ny else ny
    for i in range(sorted_ids.size):
        k = sorted_ids[i]
        xk = pos[k, 0]
        yk = pos[k, 1]
        gk = grp[k]
        cx = int((xk - ox) // cell)
        cy = int((yk - oy) // cell)
        cx = min(max(cx, 0), nx - 1)
        cy = min(max(cy, 0), ny - 1)
        best_d2 = np.inf
        best_id = -1
        for r in range(max_r + 1):
            bound = (r - 1) * cell
            if best_id >= 0 and bound > 0 and best_d2 < bound * bound:
                break
            if r == 0:
                best_d2, best_id = _scan_cell(
                    cx * ny + cy, xk, yk, gk, pos, grp, sorted_ids,
                    offsets, best_d2, best_id)
                continue
            for bx in range(cx - r, cx + r + 1):
                if bx < 0 or bx >= nx:
                    continue
                if cy - r >= 0:
                    best_d2, best_id = _scan_cell(
                        bx * ny + cy - r, xk, yk, gk, pos, grp, sorted_ids,
                        offsets, best_d2, best_id)
                if cy + r < ny:
                    best_d2, best_id = _scan_cell(
                        bx * ny + cy + r, xk, yk, gk, pos, grp, sorted_ids,
                        offsets, best_d2, best_id)
            for by in range(cy - r + 1, cy + r):
                if by < 0 or by >= ny:
                    continue
                if cx - r >= 0:
                    best_d2, best_id = _scan_cell(
                        (cx - r) * ny + by, xk, yk, gk, pos, grp, sorted_ids,
                        offsets, best_d2, best_id)
                if cx + r < nx:
                    best_d2, best_id = _scan_cell(
                        (cx + r) * ny + by, xk, yk, gk, pos, grp, sorted_ids,
                        offsets, best_d2, best_id)
        out[k] = best_id


@njit(cache=True)
def _inside_kernel(pos, active, members, out):  # pragma: no cover - compiled
    n_groups, size = members.shape
    for g in range(n_groups):
        for i in range(size):
            k = members[g, i]
            if k < 0:
                break  # padding is trailing
            if not active[k]:
                continue
            best_d2 = np.inf
            best_id = -1
            for jj in range(size):
                m = members[g, jj]
                if m < 0:
                    break
                if m == k or not active[m]:
                    continue
                dx = pos[m, 0] - pos[k, 0]
                dy = pos[m, 1] - pos[k, 1]
                d2 = dx * dx + dy * dy
                if d2 < best_d2:  # ids ascend, so ties keep the lowest
                    best_d2 = d2
                    best_id = m
            out[k] = best_id


def _concat_ranges(starts: np.ndarray, lens: np.ndarray) -> np.ndarray:
    """Concatenate arange(start_i, start_i + len_i) for all i."""
    total = int(lens.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    ends = np.cumsum(lens)
    within = np.arange(total, dtype=np.int64) - np.repeat(ends - lens, lens)
    return np.repeat(starts, lens) + within


def _nearest_outside_numpy(index: NeighborIndex, out: np.ndarray) -> None:
    """Vectorized fallback: 3x3 block scan, then brute force for agents
    whose best candidate is not provably nearest (>= one cell away)."""
    n = len(index.positions)
    ids = index.sorted_ids
    a = len(ids)
    pos = index.positions
    grp = index.group_of
    x, y = pos[:, 0], pos[:, 1]

    px = x[ids]
    py = y[ids]
    cx = np.clip(((px - index.origin[0]) // index.cell).astype(np.int64),
                 0, index.nx - 1)
    cy = np.clip(((py - index.origin[1]) // index.cell).astype(np.int64),
                 0, index.ny - 1)
    bx = cx[:, None] + np.array([-1, -1, -1, 0, 0, 0, 1, 1, 1])
    by = cy[:, None] + np.array([-1, 0, 1, -1, 0, 1, -1, 0, 1])
    inside = (bx >= 0) & (bx < index.nx) & (by >= 0) & (by < index.ny)
    cells = np.where(inside, bx * index.ny + by, 0).ravel()
    starts = index.offsets[cells]
    lens = np.where(inside.ravel(), index.offsets[cells + 1] - starts, 0)

    cand = ids[_concat_ranges(starts, lens)]
    per_agent = lens.reshape(a, 9).sum(axis=1)  # >= 1: own cell holds self
    owner = np.repeat(ids, per_agent)
    dx = x[owner] - x[cand]
    dy = y[owner] - y[cand]
    d2 = dx * dx + dy * dy
    d2[grp[owner] == grp[cand]] = np.inf

    seg = np.zeros(a, dtype=np.int64)
    np.cumsum(per_agent[:-1], out=seg[1:])
    best_d2 = np.minimum.reduceat(d2, seg)
    tied = np.where(d2 == np.repeat(best_d2, per_agent), cand, n)
    best_id = np.minimum.reduceat(tied, seg)

    resolved = best_d2 < index.cell * index.cell  # unscanned cells lie beyond
    out[ids[resolved]] = best_id[resolved]

    pending = ids[~resolved]
    for lo in range(0, len(pending), 256):
        blk = pending[lo:lo + 256]
        dx = x[blk][:, None] - px[None, :]
        dy = y[blk][:, None] - py[None, :]
        d2 = dx * dx + dy * dy
        d2[grp[blk][:, None] == grp[ids][None, :]] = np.inf
        m = d2.min(axis=1)
        tie = np.where(d2 == m[:, None], ids[None, :], n).min(axis=1)
        out[blk] = np.where(np.isinf(m), _NO_NEIGHBOR, tie)


def nearest_outside_bulk(index: NeighborIndex) -> np.ndarray:
    """Nearest-stranger id for every agent; -1 for none or inactive."""
    n = len(index.positions)
    out = np.full(n, _NO_NEIGHBOR, dtype=np.int64)
    if index.size <= 1:
        return out
    if HAVE_NUMBA:
        _outside_kernel(index.positions, index.group_of, index.sorted_ids,
                        index.offsets, float(index.origin[0]),
                        float(index.origin[1]), index.cell,
                        index.nx, index.ny, out)
    else:
        _nearest_outside_numpy(index, out)
    return out


def _nearest_inside_numpy(positions: np.ndarray, active: np.ndarray,
                          members: np.ndarray, out: np.ndarray) -> None:
    n = len(positions)
    padded = members < 0
    ids = np.where(padded, 0, members)
    ok = active[ids] & ~padded                      # (g, s)
    p = positions[ids]                              # (g, s, 2)
    diff = p[:, :, None, :] - p[:, None, :, :]
    d2 = (diff * diff).sum(axis=3)                  # (g, i, j)
    valid = ok[:, None, :] & ok[:, :, None]
    eye = np.eye(members.shape[1], dtype=bool)
    d2 = np.where(valid & ~eye, d2, np.inf)
    best_d2 = d2.min(axis=2)                        # (g, s)
    tied = np.where(d2 == best_d2[:, :, None], ids[:, None, :], n)
    best = tied.min(axis=2)
    best = np.where(np.isinf(best_d2), _NO_NEIGHBOR, best)
    out[ids[ok]] = best[ok]


def nearest_inside_bulk(positions: np.ndarray, active: np.ndarray,
                        members: np.ndarray) -> np.ndarray:
    """Nearest active group-mate id per agent from padded member lists.

    members: (n_groups, max_size) agent ids padded with -1, ascending
    inside each row.  Returns a per-agent array with -1 for sole
    survivors, padding, and inactive agents.
    """
    out = np.full(len(positions), _NO_NEIGHBOR, dtype=np.int64)
    if len(members) == 0:
        return out
    if HAVE_NUMBA:
        _inside_kernel(positions, active, members, out)
    else:
        _nearest_inside_numpy(positions, active, members, out)
    return out
