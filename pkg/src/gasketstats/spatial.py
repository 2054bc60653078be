"""Uniform-grid index for exact fixed-radius and nearest-neighbour queries."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels

_MAX_CELL_COORD = 1 << 29
_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class NeighborGrid:
    """Points bucketed by ``(floor(x / cell_size), floor(y / cell_size))``.

    Storage is CSR-like: ``order`` lists point indices sorted by cell key,
    and the members of ``keys[c]`` occupy ``order[starts[c]:starts[c+1]]``.
    """

    cell_size: float
    points: np.ndarray
    order: np.ndarray
    keys: np.ndarray
    starts: np.ndarray
    cx: np.ndarray
    cy: np.ndarray

    def __len__(self):
        return len(self.points)

    @property
    def cells(self) -> dict:
        out = {}
        for c, key in enumerate(self.keys):
            members = self.order[self.starts[c]:self.starts[c + 1]]
            first = self.starts[c]
            out[int(self.cx[first]), int(self.cy[first])] = members.tolist()
        return out

    @property
    def sorted_xy(self):
        pts = self.points[self.order]
        return np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1])

    @property
    def bounds(self):
        if not len(self.cx):
            return (0, 0, 0, 0)
        return (int(self.cx.min()), int(self.cx.max()), int(self.cy.min()), int(self.cy.max()))

    @property
    def slack(self) -> float:
        """Cell-fraction margin covering rounding in ``floor(x / cell_size)``."""
        if not len(self.points):
            return 0.0
        return 8.0 * _EPS * (float(np.abs(self.points).max()) / self.cell_size + 1.0) + 1e-12


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        return np.empty((0, 2))
    pts = pts.reshape(-1, 2)
    if not np.isfinite(pts).all():
        raise ValueError("points must be finite")
    return pts


def build_grid(points, cell_size: float) -> NeighborGrid:
    if not cell_size > 0:
        raise ValueError(f"cell_size must be positive, got {cell_size!r}")
    pts = _as_points(points)
    cx = np.floor(pts[:, 0] / cell_size).astype(np.int64)
    cy = np.floor(pts[:, 1] / cell_size).astype(np.int64)
    if len(pts) and max(np.abs(cx).max(), np.abs(cy).max()) >= _MAX_CELL_COORD:
        raise ValueError(f"cell_size {cell_size!r} too small for the point extent")
    key = kernels._pykernels._key(cx, cy)
    order = np.argsort(key, kind="stable")
    skey = key[order]
    keys, first = np.unique(skey, return_index=True)
    starts = np.append(first, len(skey)).astype(np.int64)
    return NeighborGrid(
        cell_size=float(cell_size),
        points=pts,
        order=order.astype(np.int64),
        keys=keys.astype(np.int64),
        starts=starts,
        cx=np.ascontiguousarray(cx[order]),
        cy=np.ascontiguousarray(cy[order]),
    )


def _rings(grid, radius):
    return max(1, math.ceil(radius / grid.cell_size + grid.slack))


def pair_distances(grid: NeighborGrid, radius: float, threads: int = 1) -> np.ndarray:
    """Distances of all unordered pairs closer than ``radius`` (strict)."""
    if len(grid) < 2:
        return np.empty(0)
    xs, ys = grid.sorted_xy
    return kernels.impl.pair_distances(
        xs, ys, grid.cx, grid.cy, grid.keys, grid.starts, float(radius), _rings(grid, radius), threads
    )


def pairs_within(grid: NeighborGrid, radius: float, threads: int = 1) -> int:
    """Number of unordered pairs at distance strictly below ``radius``."""
    return int(len(pair_distances(grid, radius, threads)))


def _nearest_on(grid, qidx, best, max_ring, threads):
    xs, ys = grid.sorted_xy
    q = grid.points[qidx]
    return kernels.impl.nearest(
        np.ascontiguousarray(q[:, 0]),
        np.ascontiguousarray(q[:, 1]),
        np.ascontiguousarray(qidx, dtype=np.int64),
        xs,
        ys,
        grid.order,
        grid.keys,
        grid.starts,
        grid.bounds,
        grid.cell_size,
        max_ring,
        best,
        grid.slack,
        threads,
    )


def nearest_distance(grid: NeighborGrid, point_index: int) -> float:
    """Exact distance from one indexed point to its closest other point."""
    if len(grid) < 2:
        raise ValueError("nearest distance needs at least two points")
    best = np.array([np.inf])
    _nearest_on(grid, np.array([point_index]), best, -1, 1)
    return float(best[0])


def nearest_distances(points, cell_size: float, threads: int = 1, max_ring: int = 2) -> np.ndarray:
    """Exact nearest-neighbour distance for every point.

    Centers cluster at wildly different densities, so a single fine grid
    would need huge ring searches for isolated points.  Each point is tried
    on a fine grid with a few rings; points left unresolved move to a grid
    with twice the cell size, keeping their best distance so far.
    """
    pts = _as_points(points)
    n = len(pts)
    if n < 2:
        raise ValueError("nearest distance needs at least two points")
    best = np.full(n, np.inf)
    pending = np.arange(n, dtype=np.int64)
    span = float(np.ptp(pts, axis=0).max())
    cell = float(cell_size)
    while len(pending):
        grid = build_grid(pts, cell)
        coarsest = cell >= span
        sub = best[pending].copy()
        done = _nearest_on(grid, pending, sub, -1 if coarsest else max_ring, threads)
        best[pending] = sub
        pending = pending[~done]
        cell *= 2.0
    return best
