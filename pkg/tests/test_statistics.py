import math

import numpy as np
import pytest

from gasketstats.enumerate import DELTA, enumerate_circles
from gasketstats.errors import DuplicatePointError, NumericalError
from gasketstats.geometry import GasketSpec
from gasketstats.statistics import (
    NEAREST_SPACING,
    PAIR_CORRELATION,
    Region,
    StatSeries,
    default_s_grid,
    empirical_derivative,
    energy,
    expected_visible,
    nearest_spacing,
    pair_correlation,
    restrict,
    sup_distance,
)
from oracles import brute_inverse_distance_sum, brute_nearest, brute_pair_distances

SYMMETRIC = GasketSpec(2 * math.pi / 3, 4 * math.pi / 3)
DEFAULT_GASKET = GasketSpec.from_pi_multiples(1.8 / 3, 3.7 / 3)


def test_default_grid():
    s = default_s_grid()
    assert len(s) == 401 and s[0] == 0 and s[-1] == pytest.approx(20)
    assert np.allclose(np.diff(s), 0.05)


def test_region_parsing():
    assert Region.parse("plane") == Region("plane")
    assert Region.parse("disk:0,0.5,0.25") == Region("disk", (0.0, 0.5, 0.25))
    assert Region.parse("rect:-1,-1,1,0").contains([0.5, 0.5], [-0.5, 0.5]).tolist() == [True, False]
    for bad in ("disk:0,0,-1", "rect:0,0,0,1", "ellipse:1", "disk"):
        with pytest.raises(ValueError):
            Region.parse(bad)


def test_region_boundaries_excluded():
    x = np.array([0.0, 0.5, 0.5, -0.5])
    y = np.array([0.5, 0.0, 0.5, 0.5])
    assert Region("halfplane").contains(x, y).tolist() == [False, True, True, False]
    assert Region("quadrant").contains(x, y).tolist() == [False, False, True, False]


def test_restrict_examples():
    cs = enumerate_circles(SYMMETRIC, 100)
    assert len(restrict(cs, Region("plane"))) == cs.count
    n_half = len(restrict(cs, Region("halfplane")))
    n_quad = len(restrict(cs, Region("quadrant")))
    assert n_quad < n_half < cs.count


def test_pair_correlation_two_points(backend):
    d, T = 0.3, 10.0
    F = pair_correlation([(0, 0), (d, 0)], T, [0, 2.9, 3.0, 3.1, 10])
    # d*T = 3.0000000000000004 in floating point, so 3.0 is not yet counted
    assert F.values.tolist() == [0, 0, 0, 0.5, 0.5]


def test_pair_correlation_three_collinear(backend):
    pts = [(0.0, 0.0), (0.1, 0.0), (0.25, 0.0)]
    F = pair_correlation(pts, 1.0, [0.0, 0.12, 0.2, 0.3])
    # pairs at 0.1, 0.15, 0.25
    assert F.values.tolist() == pytest.approx([0, 1 / 3, 2 / 3, 1.0])


def test_pair_correlation_matches_brute_force_on_gasket(backend):
    T = 100.0
    pts = enumerate_circles(SYMMETRIC, T).centers
    d = brute_pair_distances(pts)
    s = default_s_grid()
    F = pair_correlation(pts, T, s)
    counts = np.array([(d * T < si).sum() for si in s])
    assert np.array_equal(np.rint(F.values * len(pts)).astype(int), counts)
    i4 = int(np.flatnonzero(np.isclose(s, 4.0))[0])
    assert F.values[i4] == counts[i4] / len(pts)


def test_pair_correlation_needs_two_points():
    with pytest.raises(ValueError):
        pair_correlation([(0, 0)], 10.0)


def test_derivative_of_constant_is_zero():
    s = default_s_grid(2.0, 0.05)
    F = StatSeries(s, np.full(len(s), 0.25), PAIR_CORRELATION, 10.0)
    dF = empirical_derivative(F)
    assert (dF.values == 0).all()
    assert len(dF.s_grid) == len(s) - 2


def test_derivative_single_jump():
    s = default_s_grid(1.0, 0.05)
    v = np.where(s > 0.52, 0.3, 0.0)  # jump between s=0.50 and s=0.55
    dF = empirical_derivative(StatSeries(s, v, PAIR_CORRELATION, 1.0))
    at = lambda x: dF.values[np.argmin(np.abs(dF.s_grid - x))]
    assert at(0.45) == pytest.approx(0.3 / 0.1)
    assert at(0.50) == pytest.approx(0.3 / 0.1)
    assert at(0.40) == 0 and at(0.55) == 0


def test_derivative_rejects_incompatible_grid():
    s = default_s_grid(2.0, 0.03)
    with pytest.raises(ValueError):
        empirical_derivative(StatSeries(s, np.zeros(len(s)), PAIR_CORRELATION, 1.0))
    with pytest.raises(ValueError):
        empirical_derivative(StatSeries(s, np.zeros(len(s)), NEAREST_SPACING, 1.0), 0.06)


def test_derivative_recomputes_from_gasket_series():
    T = 500.0
    F = pair_correlation(enumerate_circles(DEFAULT_GASKET, T).centers, T)
    dF = empirical_derivative(F)
    for s, v in zip(dF.s_grid, dF.values):
        i = int(round(s / 0.05))
        assert v == (F.values[i + 2] - F.values[i]) / 0.1


def test_nearest_two_points(backend):
    H = nearest_spacing([(0, 0), (0.25, 0)], 4.0, [0, 0.5, 1.0, 1.5])
    assert H.values.tolist() == [0, 0, 0, 1]


def test_nearest_ecdf_axioms(backend):
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 1, (300, 2))
    H = nearest_spacing(pts, 10.0, default_s_grid(100.0, 0.5))
    assert H.values[0] == 0 and H.values[-1] == 1.0
    assert (np.diff(H.values) >= 0).all()


def test_nearest_matches_brute_force_on_gasket(backend):
    T = 100.0
    pts = enumerate_circles(SYMMETRIC, T).centers
    g = np.sort(brute_nearest(pts) * T)
    s = default_s_grid()
    H = nearest_spacing(pts, T, s)
    assert np.array_equal(np.rint(H.values * len(pts)).astype(int), np.searchsorted(g, s, side="left"))


def test_energy_two_points(backend):
    d, T = 0.4, 3.0
    assert energy([(0, 0), (0, d)], T).value == pytest.approx(2 / (d * T ** (2 * DELTA)), rel=1e-15)


def test_energy_unit_triangle(backend):
    pts = [(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)]
    assert energy(pts, 1.0).value == pytest.approx(6.0, rel=1e-15)


def test_energy_rejects_duplicates(backend):
    with pytest.raises(DuplicatePointError) as err:
        energy([(0, 0), (1, 1), (0.5, 0), (1, 1)], 1.0)
    assert err.value.indices == (1, 3)
    assert "1" in str(err.value) and "3" in str(err.value)


def test_energy_matches_brute_force(backend):
    T = 200.0
    pts = enumerate_circles(SYMMETRIC, T).centers
    want = brute_inverse_distance_sum(pts) / T ** (2 * DELTA)
    assert energy(pts, T).value == pytest.approx(want, rel=1e-10)


def test_energy_thread_count_does_not_change_bits(backend):
    pts = enumerate_circles(DEFAULT_GASKET, 800).centers
    assert energy(pts, 800, threads=1).value == energy(pts, 800, threads=8).value


def test_expected_visible_two_points(backend):
    T = 100.0
    assert expected_visible([(0, 0), (0.05, 0)], T=T) == 1.0
    assert expected_visible([(0, 0), (0.15, 0)], T=T) == 0.0
    assert expected_visible([(0, 0), (0.05, 0)], 0.0, T=T) == 0.0


def test_expected_visible_direct_average(backend):
    cs = enumerate_circles(DEFAULT_GASKET, 1000)
    pts = cs.centers
    d = np.hypot(pts[:, None, 0] - pts[None, :, 0], pts[:, None, 1] - pts[None, :, 1])
    np.fill_diagonal(d, np.inf)
    direct = (d * cs.T < 10.0).sum(axis=1).mean()
    assert expected_visible(cs) == pytest.approx(direct, abs=1e-12)
    assert expected_visible(cs) == 2 * pair_correlation(pts, cs.T, [10.0]).values[0]


def test_support_gap_without_bounding_circle():
    T = 500.0
    cs = enumerate_circles(DEFAULT_GASKET, T, include_bounding=False)
    s = default_s_grid(3.0, 0.05)
    F = pair_correlation(cs.centers, T, s)
    H = nearest_spacing(cs.centers, T, s)
    small = s <= 2.0
    assert (F.values[small] == 0).all() and (H.values[small] == 0).all()


def test_scaling_invariance():
    cs = enumerate_circles(DEFAULT_GASKET, 200)
    pts, T = cs.centers, cs.T
    s = default_s_grid()
    for stat in (pair_correlation, nearest_spacing):
        a = stat(pts, T, s)
        b = stat(pts * 2.0, T / 2.0, s)
        assert np.array_equal(a.values, b.values)


def test_series_validation():
    s = np.array([0.0, 1.0, 2.0])
    with pytest.raises(NumericalError):
        StatSeries(s, np.array([0.0, 0.5, 0.4]), PAIR_CORRELATION, 1.0).validate()
    with pytest.raises(NumericalError):
        StatSeries(s, np.array([0.0, 0.5, 1.5]), NEAREST_SPACING, 1.0).validate()
    with pytest.raises(NumericalError):
        StatSeries(s, np.array([0.1, 0.5, 0.6]), PAIR_CORRELATION, 1.0).validate()


def test_sup_distance():
    s = default_s_grid(1.0, 0.05)
    a = StatSeries(s, np.linspace(0, 1, len(s)), PAIR_CORRELATION, 1.0)
    b = StatSeries(s, np.linspace(0, 0.5, len(s)), PAIR_CORRELATION, 1.0)
    assert sup_distance(a, b) == pytest.approx(0.5)
    assert sup_distance(a, b, s_max=0.5) == pytest.approx(0.25)


def test_quantized_csv_round_trip():
    F = pair_correlation(enumerate_circles(DEFAULT_GASKET, 300).centers, 300.0).quantized()
    rows = [line.split(",") for line in F.to_csv().splitlines()[1:]]
    assert [float(v) for _, v in rows] == F.values.tolist()
