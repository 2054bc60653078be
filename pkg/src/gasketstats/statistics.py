"""Normalized spatial statistics of circle centers.

Distances are measured in units of ``1/T``: a pair of centers at Euclidean
distance ``d`` sits at normalized distance ``d * T``.  All indicator
comparisons are strict (``d * T < s``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import kernels
from .enumerate import DELTA, CircleSet
from .errors import DuplicatePointError, NumericalError
from .spatial import _as_points, build_grid, nearest_distances, pair_distances

PAIR_CORRELATION = "pair_correlation"
PAIR_CORRELATION_DERIVATIVE = "pair_correlation_derivative"
NEAREST_SPACING = "nearest_spacing"


@dataclass(frozen=True)
class Region:
    """A subset of the plane used to restrict the point set.

    ``kind`` is one of ``plane``, ``halfplane`` (Re z > 0), ``quadrant``
    (Re z > 0 and Im z > 0), ``disk`` (params cx, cy, r) or ``rect``
    (params x0, y0, x1, y1).  Boundaries are excluded.
    """

    kind: str = "plane"
    params: tuple = ()

    def __post_init__(self):
        if self.kind in ("plane", "halfplane", "quadrant"):
            if self.params:
                raise ValueError(f"region {self.kind} takes no parameters")
        elif self.kind == "disk":
            if len(self.params) != 3 or not self.params[2] > 0:
                raise ValueError(f"disk needs (cx, cy, r) with r > 0, got {self.params}")
        elif self.kind == "rect":
            if len(self.params) != 4:
                raise ValueError(f"rect needs (x0, y0, x1, y1), got {self.params}")
            x0, y0, x1, y1 = self.params
            if not (x1 > x0 and y1 > y0):
                raise ValueError(f"degenerate rectangle {self.params}")
        else:
            raise ValueError(f"unknown region kind {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "Region":
        text = text.strip().lower()
        aliases = {"plane": "plane", "whole": "plane", "halfplane": "halfplane", "half": "halfplane",
                   "quadrant": "quadrant"}
        if text in aliases:
            return cls(aliases[text])
        kind, _, rest = text.partition(":")
        if kind not in ("disk", "rect") or not rest:
            raise ValueError(f"cannot parse region {text!r}")
        return cls(kind, tuple(float(v) for v in rest.split(",")))

    @property
    def name(self) -> str:
        if not self.params:
            return self.kind
        return self.kind + "_" + "_".join(f"{p:g}" for p in self.params)

    def __str__(self):
        if not self.params:
            return self.kind
        return self.kind + ":" + ",".join(f"{p:g}" for p in self.params)

    def contains(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "plane":
            return np.ones(x.shape, dtype=bool)
        if self.kind == "halfplane":
            return x > 0
        if self.kind == "quadrant":
            return (x > 0) & (y > 0)
        if self.kind == "disk":
            cx, cy, r = self.params
            return (x - cx) ** 2 + (y - cy) ** 2 < r * r
        x0, y0, x1, y1 = self.params
        return (x > x0) & (x < x1) & (y > y0) & (y < y1)


WHOLE_PLANE = Region("plane")


@dataclass(frozen=True, eq=False)
class StatSeries:
    s_grid: np.ndarray
    values: np.ndarray
    kind: str
    T: float
    region: Region = WHOLE_PLANE
    n_points: int = 0
    meta: dict = field(default_factory=dict)

    def validate(self) -> "StatSeries":
        """Raise if the series breaks the invariants of its kind."""
        s, v = self.s_grid, self.values
        if len(s) != len(v):
            raise NumericalError("series grid and values differ in length")
        if len(s) > 1 and not np.all(np.diff(s) > 0):
            raise NumericalError("series grid is not increasing")
        if not np.isfinite(v).all() or (v < 0).any():
            raise NumericalError(f"{self.kind} series has negative or non-finite values")
        if self.kind in (PAIR_CORRELATION, NEAREST_SPACING):
            if len(v) > 1 and (np.diff(v) < 0).any():
                raise NumericalError(f"{self.kind} series is not non-decreasing")
            if len(s) and s[0] == 0 and v[0] != 0:
                raise NumericalError(f"{self.kind} series is nonzero at s = 0")
        if self.kind == NEAREST_SPACING and (v > 1).any():
            raise NumericalError("nearest spacing exceeds 1")
        return self

    def quantized(self) -> "StatSeries":
        """Values rounded to the 12 significant digits written to CSV."""
        return replace(self, values=np.array([float(f"{v:.12g}") for v in self.values]))

    def to_csv(self) -> str:
        lines = ["s,value"]
        lines += [f"{s:.12g},{v:.12g}" for s, v in zip(self.s_grid, self.values)]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class EnergyValue:
    T: float
    value: float


def default_s_grid(s_max: float = 20.0, step: float = 0.05) -> np.ndarray:
    if not step > 0 or s_max < 0:
        raise ValueError(f"bad s grid: s_max={s_max!r}, step={step!r}")
    return np.arange(int(round(s_max / step)) + 1) * step


def restrict(circles: CircleSet, region: Region = WHOLE_PLANE) -> np.ndarray:
    """Centers of ``circles`` lying in ``region``, in canonical order."""
    mask = region.contains(circles.x, circles.y)
    return np.column_stack([circles.x[mask], circles.y[mask]])


def _check_grid(s_grid):
    s = np.asarray(s_grid, dtype=float)
    if s.ndim != 1 or not len(s):
        raise ValueError("s_grid must be a non-empty 1-d sequence")
    if s[0] < 0 or (len(s) > 1 and not np.all(np.diff(s) > 0)):
        raise ValueError("s_grid must be increasing and start at s >= 0")
    return s


def _need_two(pts):
    if len(pts) < 2:
        raise ValueError(f"statistic needs at least 2 points, got {len(pts)}")


def normalized_pair_distances(points, T: float, s_max: float, threads: int = 1) -> np.ndarray:
    """Sorted ``d * T`` over unordered pairs with ``d * T < s_max``."""
    pts = _as_points(points)
    if s_max <= 0 or len(pts) < 2:
        return np.empty(0)
    radius = s_max / T
    grid = build_grid(pts, radius * (1.0 + 1e-6))
    u = pair_distances(grid, radius * (1.0 + 1e-9), threads) * T
    u = u[u < s_max]
    u.sort()
    return u


def pair_correlation(points, T: float, s_grid=None, region: Region = WHOLE_PLANE, threads: int = 1) -> StatSeries:
    """Unordered pairs with ``d * T < s``, divided by the number of points.

    Equivalent to the ordered-pair sum with the ``1 / (2 n)`` prefactor.
    ``region`` is recorded only; pass already-restricted points.
    """
    pts = _as_points(points)
    _need_two(pts)
    s = _check_grid(default_s_grid() if s_grid is None else s_grid)
    u = normalized_pair_distances(pts, T, float(s[-1]), threads)
    counts = np.searchsorted(u, s, side="left")
    return StatSeries(s, counts / len(pts), PAIR_CORRELATION, float(T), region, len(pts)).validate()


def empirical_derivative(series: StatSeries, delta: float = 0.1) -> StatSeries:
    """Forward difference ``(F(s + delta) - F(s)) / delta`` on grid points."""
    if series.kind != PAIR_CORRELATION:
        raise ValueError(f"derivative is defined for pair correlation, got {series.kind}")
    s = series.s_grid
    target = s + delta
    j = np.clip(np.searchsorted(s, target - 1e-9), 0, len(s) - 1)
    hit = np.abs(s[j] - target) <= 1e-9 * np.maximum(1.0, np.abs(target))
    inside = target <= s[-1] + 1e-9
    if (inside & ~hit).any() or not hit.any():
        raise ValueError(f"grid spacing does not divide delta={delta!r}")
    i = np.flatnonzero(hit)
    vals = (series.values[j[i]] - series.values[i]) / delta
    return StatSeries(
        s[i], vals, PAIR_CORRELATION_DERIVATIVE, series.T, series.region, series.n_points,
        {**series.meta, "delta": delta},
    ).validate()


def nearest_spacing(points, T: float, s_grid=None, region: Region = WHOLE_PLANE, threads: int = 1) -> StatSeries:
    """ECDF of ``g(x) * T`` where ``g(x)`` is the distance to the closest other point."""
    pts = _as_points(points)
    _need_two(pts)
    s = _check_grid(default_s_grid() if s_grid is None else s_grid)
    # disjoint circles of curvature < T have centers more than 2/T apart
    g = np.sort(nearest_distances(pts, 2.0 / T, threads) * T)
    counts = np.searchsorted(g, s, side="left")
    meta = {} if region.kind == "plane" else {"restricted_extension": True}
    return StatSeries(s, counts / len(pts), NEAREST_SPACING, float(T), region, len(pts), meta).validate()


def inverse_distance_sum(points, threads: int = 1) -> float:
    """Sum of ``1/d`` over unordered pairs, reduced in a fixed order."""
    pts = _as_points(points)
    rows, di, dj = kernels.impl.energy_rows(
        np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1]), threads
    )
    if di >= 0:
        raise DuplicatePointError(di, dj)
    return math.fsum(rows)


def energy(points, T: float, threads: int = 1) -> EnergyValue:
    """``T**(-2 delta)`` times the sum of ``1/d`` over ordered pairs."""
    pts = _as_points(points)
    _need_two(pts)
    total = 2.0 * inverse_distance_sum(pts, threads)
    return EnergyValue(float(T), total / float(T) ** (2.0 * DELTA))


def expected_visible(circles, s: float = 10.0, T: Optional[float] = None, threads: int = 1) -> float:
    """Mean number of other centers within ``s / T`` of a center: ``2 F_T(s)``.

    ``circles`` is a CircleSet, or an array of points together with ``T``.
    """
    if isinstance(circles, CircleSet):
        pts, T = circles.centers, circles.T
    else:
        pts = _as_points(circles)
        if T is None:
            raise ValueError("T is required when passing raw points")
    _need_two(pts)
    if s <= 0:
        return 0.0
    u = normalized_pair_distances(pts, T, s, threads)
    return 2.0 * len(u) / len(pts)


def sup_distance(a: StatSeries, b: StatSeries, s_max: Optional[float] = None) -> float:
    """Largest absolute gap between two series over their shared grid points."""
    sa = np.round(a.s_grid, 9)
    sb = np.round(b.s_grid, 9)
    common, ia, ib = np.intersect1d(sa, sb, return_indices=True)
    if s_max is not None:
        keep = common <= s_max + 1e-9
        ia, ib = ia[keep], ib[keep]
    if not len(ia):
        raise ValueError("series share no grid points")
    return float(np.max(np.abs(a.values[ia] - b.values[ib])))
