"""Circles, Descartes quadruples and the root configuration of a gasket.

A circle is stored as its signed curvature ``k`` together with the complex
number ``m = k * z`` (curvature times center).  In that form both the
curvatures and the curvature-centers of four mutually tangent circles obey
the same quadratic relation, and replacing one circle by the other solution
of that relation is a linear update.

Points in the plane are plain Python ``complex`` values (``re + 1j*im``);
arrays of points elsewhere in the package are ``(n, 2)`` float arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from .errors import DegenerateSpecError, InvalidSpecError, NumericalError

TOL_DESCARTES = 1e-9
TOL_TANGENCY = 1e-9
EPS_ANGLE = 1e-6
TWO_PI = 2.0 * math.pi

PlanePoint = complex


@dataclass(frozen=True)
class Circle:
    k: float
    m: complex

    def __post_init__(self):
        if self.k == 0:
            raise ValueError("zero curvature (straight line) is not a circle here")
        if not (math.isfinite(self.k) and math.isfinite(self.m.real) and math.isfinite(self.m.imag)):
            raise ValueError(f"non-finite circle data k={self.k!r} m={self.m!r}")

    @property
    def center(self) -> complex:
        return self.m / self.k

    @property
    def radius(self) -> float:
        return 1.0 / abs(self.k)


BOUNDING = Circle(-1.0, 0j)


@dataclass(frozen=True)
class DescartesQuadruple:
    circles: Tuple[Circle, Circle, Circle, Circle]
    last_swapped: Optional[int] = None

    def __post_init__(self):
        if len(self.circles) != 4:
            raise ValueError("a Descartes quadruple has exactly four circles")

    @property
    def curvatures(self) -> Tuple[float, float, float, float]:
        return tuple(c.k for c in self.circles)


@dataclass(frozen=True)
class GasketSpec:
    """Tangency angles of the second and third inner root circles.

    The first inner circle touches the unit circle at angle 0; the other two
    touch it at ``theta1`` and ``theta2`` (radians).
    """

    theta1: float
    theta2: float

    def __post_init__(self):
        t1, t2 = self.theta1, self.theta2
        if not (math.isfinite(t1) and math.isfinite(t2)):
            raise InvalidSpecError(f"non-finite angles ({t1!r}, {t2!r})")
        if not (0.0 <= t1 <= TWO_PI and 0.0 <= t2 <= TWO_PI):
            raise InvalidSpecError(f"angles must lie in (0, 2*pi), got ({t1!r}, {t2!r})")
        if min(t1, abs(t2 - t1), TWO_PI - t2) < EPS_ANGLE:
            raise DegenerateSpecError(
                f"tangency points at angles 0, {t1!r}, {t2!r} coincide or nearly coincide"
            )
        if t1 > t2:
            raise InvalidSpecError(f"need theta1 < theta2, got ({t1!r}, {t2!r})")

    @classmethod
    def from_pi_multiples(cls, a: float, b: float) -> "GasketSpec":
        return cls(a * math.pi, b * math.pi)

    @property
    def angles(self) -> Tuple[float, float, float]:
        return (0.0, self.theta1, self.theta2)


def descartes_residual(q: DescartesQuadruple) -> Tuple[float, float]:
    """Absolute residuals of the Descartes relation for curvatures and k*z.

    Returns ``(|(sum k)^2 - 2 sum k^2|, max(|Re r|, |Im r|))`` where ``r`` is
    the same expression evaluated on the complex curvature-centers.
    """
    ks = [c.k for c in q.circles]
    ms = [c.m for c in q.circles]
    rk = sum(ks) ** 2 - 2.0 * sum(k * k for k in ks)
    rm = sum(ms) ** 2 - 2.0 * sum(m * m for m in ms)
    return abs(rk), max(abs(rm.real), abs(rm.imag))


def tangency_residual(a: Circle, b: Circle) -> float:
    """Distance between centers minus the distance tangency requires."""
    d = abs(a.center - b.center)
    if a.k < 0 or b.k < 0:
        outer, inner = (a, b) if a.k < 0 else (b, a)
        want = outer.radius - inner.radius
    else:
        want = a.radius + b.radius
    return abs(d - want)


def quadruple_residuals(q: DescartesQuadruple) -> Tuple[float, float, float]:
    """Relative Descartes residuals and the worst absolute tangency residual."""
    rk, rm = descartes_residual(q)
    ks = [c.k for c in q.circles]
    scale_k = max(1.0, sum(k * k for k in ks))
    scale_m = max(1.0, sum(abs(c.m) ** 2 for c in q.circles))
    worst = 0.0
    for i in range(4):
        for j in range(i + 1, 4):
            worst = max(worst, tangency_residual(q.circles[i], q.circles[j]))
    return rk / scale_k, rm / scale_m, worst


def check_quadruple(q: DescartesQuadruple, tol_descartes=TOL_DESCARTES, tol_tangency=TOL_TANGENCY):
    rk, rm, rt = quadruple_residuals(q)
    if rk > tol_descartes or rm > tol_descartes or rt > tol_tangency:
        raise NumericalError(
            f"quadruple {q.curvatures} violates invariants: "
            f"curvature residual {rk:.3g}, center residual {rm:.3g}, tangency residual {rt:.3g}"
        )
    return rk, rm, rt


def swap(q: DescartesQuadruple, i: int) -> DescartesQuadruple:
    """Replace circle ``i`` by the other circle tangent to the remaining three."""
    if not 0 <= i <= 3:
        raise IndexError(f"swap index must be in 0..3, got {i}")
    others = [c for j, c in enumerate(q.circles) if j != i]
    old = q.circles[i]
    k = 2.0 * (others[0].k + others[1].k + others[2].k) - old.k
    m = 2.0 * (others[0].m + others[1].m + others[2].m) - old.m
    circles = list(q.circles)
    circles[i] = Circle(k, m)
    return DescartesQuadruple(tuple(circles), last_swapped=i)


def solve_root_circles(spec: GasketSpec) -> Tuple[Circle, Circle, Circle]:
    """The three inner circles touching the unit circle at the given angles.

    For two circles internally tangent to the unit circle at angular
    separation ``phi`` and tangent to each other,
    ``r_a/(1-r_a) * r_b/(1-r_b) = sin(phi/2)**2``.  Writing
    ``u = r/(1-r)`` the three pairwise equations solve in closed form, and
    then ``k = 1 + 1/u`` and ``k*z = exp(i*theta)/u``.
    """
    angles = spec.angles
    s = {}
    for a in range(3):
        for b in range(a + 1, 3):
            s[a, b] = s[b, a] = abs(math.sin(0.5 * (angles[b] - angles[a])))
    if min(s.values()) < 0.25 * EPS_ANGLE:
        raise DegenerateSpecError(f"tangency points at angles {angles} coincide or nearly coincide")
    us = [
        s[0, 1] * s[0, 2] / s[1, 2],
        s[0, 1] * s[1, 2] / s[0, 2],
        s[0, 2] * s[1, 2] / s[0, 1],
    ]
    circles = tuple(
        Circle(1.0 + 1.0 / u, complex(math.cos(th), math.sin(th)) / u) for u, th in zip(us, angles)
    )
    _check_root_circles(circles, angles)
    return circles


def _check_root_circles(circles, angles):
    worst = 0.0
    for c, th in zip(circles, angles):
        if not 0.0 < c.radius < 1.0:
            raise DegenerateSpecError(f"solved radius {c.radius!r} outside (0, 1)")
        touch = (1.0 - c.radius) * complex(math.cos(th), math.sin(th))
        worst = max(worst, abs(c.center - touch), tangency_residual(BOUNDING, c))
    for a in range(3):
        for b in range(a + 1, 3):
            worst = max(worst, tangency_residual(circles[a], circles[b]))
    if worst > TOL_TANGENCY:
        raise DegenerateSpecError(f"root circle solve residual {worst:.3g} exceeds tolerance")


def reduce_to_root(q: DescartesQuadruple) -> DescartesQuadruple:
    """Swap away inner circles while that lowers their curvature.

    The result is a quadruple from which no swap decreases a curvature, so
    curvature grows along every reduced word leaving it.  The bounding
    circle stays in slot 0 since swapping it always yields a larger circle.
    """
    changed = True
    while changed:
        changed = False
        for i in (1, 2, 3):
            cand = swap(q, i)
            if cand.circles[i].k < q.circles[i].k * (1.0 - 1e-12):
                q = DescartesQuadruple(cand.circles)
                changed = True
    return q


def root_quadruple(spec: GasketSpec) -> DescartesQuadruple:
    c1, c2, c3 = solve_root_circles(spec)
    q = reduce_to_root(DescartesQuadruple((BOUNDING, c1, c2, c3)))
    check_quadruple(q)
    return q
