"""Curvature-bounded enumeration of the circles of a gasket."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import NumericalError
from .geometry import TOL_DESCARTES, TOL_TANGENCY, Circle, GasketSpec, root_quadruple

DELTA = 1.305688  # Hausdorff dimension of the Apollonian gasket

_CHECK_STRIDES = {"all": 1, "sample": 100, "off": 0}


@dataclass(frozen=True)
class CircleSet:
    """Circles of curvature below ``T`` in canonical order.

    Canonical order sorts by curvature, then center x, then center y.
    ``diagnostics`` records the worst invariant residuals seen while
    generating the set and how many quadruples were checked.
    """

    k: np.ndarray
    x: np.ndarray
    y: np.ndarray
    T: float
    spec: GasketSpec
    include_bounding: bool
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def count(self) -> int:
        return len(self.k)

    def __len__(self):
        return len(self.k)

    @property
    def radius(self) -> np.ndarray:
        return 1.0 / np.abs(self.k)

    @property
    def centers(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    @property
    def circles(self):
        return [Circle(float(k), complex(k * x, k * y)) for k, x, y in zip(self.k, self.x, self.y)]


@dataclass(frozen=True)
class CountRatio:
    T: float
    count: int
    ratio: float


def _check_mode(check, T):
    if check == "auto":
        return "all" if T <= 100 else "sample"
    if check not in _CHECK_STRIDES:
        raise ValueError(f"check must be one of auto/all/sample/off, got {check!r}")
    return check


def enumerate_circles(spec: GasketSpec, T: float, include_bounding: bool = True, check: str = "auto") -> CircleSet:
    """Every circle of the gasket with curvature strictly below ``T``.

    Walks reduced words in the four swaps from the root quadruple and prunes
    a branch as soon as its new curvature reaches ``T``; curvature grows
    along every such word, so nothing below the bound is missed.

    ``check`` controls how many generated quadruples are validated against
    the Descartes and tangency invariants: ``"all"``, ``"sample"`` (one in a
    hundred), ``"off"``, or ``"auto"`` (all when ``T <= 100``).
    """
    T = float(T)
    mode = _check_mode(check, T)
    q = root_quadruple(spec)
    root = np.array([[c.k, c.m.real, c.m.imag] for c in q.circles])
    grown, diag = kernels.impl.expand_tree(root, T, _CHECK_STRIDES[mode])
    if diag[4]:
        raise NumericalError(f"curvature failed to grow along {int(diag[4])} reduced words")
    if diag[0] > TOL_DESCARTES or diag[1] > TOL_DESCARTES or diag[2] > TOL_TANGENCY:
        raise NumericalError(
            f"enumerated quadruple residuals exceed tolerance: curvature {diag[0]:.3g}, "
            f"center {diag[1]:.3g}, tangency {diag[2]:.3g}"
        )

    seeds = [row for row in root[1:] if row[0] < T]
    if include_bounding and root[0, 0] < T:
        seeds.insert(0, root[0])
    rows = np.concatenate([np.array(seeds).reshape(-1, 3), grown])
    k = rows[:, 0]
    # + 0.0 turns the bounding circle's -0.0 center into 0.0
    x = rows[:, 1] / k + 0.0
    y = rows[:, 2] / k + 0.0
    order = np.lexsort((y, x, k))
    return CircleSet(
        k=k[order],
        x=x[order],
        y=y[order],
        T=T,
        spec=spec,
        include_bounding=include_bounding,
        diagnostics={
            "check": mode,
            "max_curvature_residual": float(diag[0]),
            "max_center_residual": float(diag[1]),
            "max_tangency_residual": float(diag[2]),
            "quadruples_checked": int(diag[3]),
            "quadruples_generated": len(grown),
            "backend": kernels.impl.BACKEND,
        },
    )


def count_ratio(circles: CircleSet) -> CountRatio:
    if circles.count == 0:
        raise ValueError("count ratio of an empty circle set")
    return CountRatio(circles.T, circles.count, circles.count / circles.T ** DELTA)


def format_circles_csv(circles: CircleSet) -> str:
    lines = ["k,re,im,r"]
    for k, x, y, r in zip(circles.k, circles.x, circles.y, circles.radius):
        lines.append(f"{k:.12g},{x:.12g},{y:.12g},{r:.12g}")
    return "\n".join(lines) + "\n"
