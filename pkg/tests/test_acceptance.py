"""Exit criteria for the package, one test per criterion.

Run ``pytest tests/test_acceptance.py -rA`` to see the pass/fail summary
printed at the end of the session.
"""

import csv
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from gasketstats.enumerate import DELTA, count_ratio, enumerate_circles
from gasketstats.geometry import GasketSpec, check_quadruple, root_quadruple, solve_root_circles, tangency_residual
from gasketstats.harness import COMPARISON_SPECS, parse_pi_multiple
from gasketstats.statistics import (
    Region,
    default_s_grid,
    energy,
    nearest_spacing,
    normalized_pair_distances,
    pair_correlation,
    restrict,
    sup_distance,
)
from oracles import bfs_circles, brute_inverse_distance_sum, brute_nearest, brute_pair_distances

DEFAULT_GASKET = GasketSpec.from_pi_multiples(1.8 / 3, 3.7 / 3)
SYMMETRIC = GasketSpec(2 * math.pi / 3, 4 * math.pi / 3)
RIGHT = GasketSpec(math.pi / 2, math.pi)
COMPARISON = [GasketSpec.from_pi_multiples(parse_pi_multiple(a), parse_pi_multiple(b)) for a, b in COMPARISON_SPECS]
S_GRID = default_s_grid()


def test_c01_geometry_exactness(criterion):
    worst = [0.0, 0.0, 0.0]
    slowest = 0.0
    for spec in COMPARISON:
        check_quadruple(root_quadruple(spec))
        t0 = time.perf_counter()
        cs = enumerate_circles(spec, 1e4, check="all")
        slowest = max(slowest, time.perf_counter() - t0)
        d = cs.diagnostics
        assert d["quadruples_checked"] == d["quadruples_generated"] > 0
        worst = [max(worst[0], d["max_curvature_residual"]), max(worst[1], d["max_center_residual"]),
                 max(worst[2], d["max_tangency_residual"])]
    criterion("C1 geometry exactness", f"worst residuals {worst[0]:.2e}/{worst[1]:.2e}/{worst[2]:.2e}, "
                                       f"slowest {slowest:.2f}s")
    assert max(worst) <= 1e-9
    assert slowest < 60


def test_c02_root_solve(criterion):
    radii = [c.radius for c in solve_root_circles(RIGHT)]
    sym = [c.radius for c in solve_root_circles(SYMMETRIC)]
    err = max(max(abs(a - b) for a, b in zip(radii, [0.5, 1 / 3, 0.5])),
              max(abs(r - (2 * math.sqrt(3) - 3)) for r in sym))
    res = max(tangency_residual(a, b) for spec in (RIGHT, SYMMETRIC)
              for q in [root_quadruple(spec).circles] for i, a in enumerate(q) for b in q[i + 1:])
    criterion("C2 root solve oracle", f"max radius error {err:.1e}, tangency residual {res:.1e}")
    assert err <= 1e-12 and res <= 1e-9


def test_c03_enumeration_oracle(criterion):
    specs = [SYMMETRIC, RIGHT, DEFAULT_GASKET]
    for spec in specs:
        ref = bfs_circles([(c.k, c.m) for c in solve_root_circles(spec)], 50.0)
        cs = enumerate_circles(spec, 50.0)
        assert cs.count == len(ref)
        assert np.allclose(cs.k, sorted(c[0] for c in ref), rtol=1e-9, atol=1e-9)
    criterion("C3 enumeration oracle", "3 specs at T=50 match visited-set BFS")


def _stat_checks(pts, T):
    n = len(pts)
    d = np.sort(brute_pair_distances(pts) * T)
    F = pair_correlation(pts, T, S_GRID)
    assert np.array_equal(np.rint(F.values * n).astype(np.int64), np.searchsorted(d, S_GRID, "left"))
    g = np.sort(brute_nearest(pts) * T)
    H = nearest_spacing(pts, T, S_GRID)
    assert np.array_equal(np.rint(H.values * n).astype(np.int64), np.searchsorted(g, S_GRID, "left"))
    want = brute_inverse_distance_sum(pts) / T ** (2 * DELTA)
    got = energy(pts, T).value
    return abs(got - want) / want


def test_c04_statistics_oracle(criterion):
    worst = _stat_checks(enumerate_circles(SYMMETRIC, 100.0).centers, 100.0)
    rng = np.random.default_rng(20170401)
    for _ in range(100):
        n = int(rng.integers(2, 2001))
        pts = rng.uniform(-1, 1, (n, 2))
        T = float(rng.uniform(5, 2000))
        worst = max(worst, _stat_checks(pts, T))
    criterion("C4 statistics oracle", f"counts exact, worst energy rel error {worst:.1e}")
    assert worst <= 1e-10


def test_c05_support_gap(criterion):
    T = 1000.0
    cs = enumerate_circles(DEFAULT_GASKET, T, include_bounding=False)
    u = normalized_pair_distances(cs.centers, T, 3.0)
    s = S_GRID[S_GRID <= 2.0]
    F = pair_correlation(cs.centers, T, s)
    H = nearest_spacing(cs.centers, T, s)
    criterion("C5 support gap", f"min normalized pair distance {u[0]:.6f}")
    assert u[0] > 2
    assert (F.values == 0).all() and (H.values == 0).all()


def test_c06_counting_trend(criterion):
    ratios = [count_ratio(enumerate_circles(DEFAULT_GASKET, T)).ratio for T in (200, 400, 800, 1600)]
    changes = [abs(b - a) / a for a, b in zip(ratios, ratios[1:])]
    criterion("C6 counting trend", "ratios " + ", ".join(f"{r:.5f}" for r in ratios)
              + "; changes " + ", ".join(f"{c:.4f}" for c in changes))
    assert all(b < a for a, b in zip(changes, changes[1:])), "relative changes are not decreasing"
    assert changes[-1] <= 0.05


def test_c07_paircorr_stability(criterion):
    F = {T: pair_correlation(enumerate_circles(DEFAULT_GASKET, T).centers, T, S_GRID) for T in (500.0, 1000.0)}
    gap = sup_distance(F[500.0], F[1000.0], s_max=6.0)
    criterion("C7 pair-correlation stability", f"sup|F_500 - F_1000| on [0,6] = {gap:.4f} (bound 0.05)")
    assert gap <= 0.05


def test_c08_region_independence(criterion):
    T = 1000.0
    cs = enumerate_circles(DEFAULT_GASKET, T)
    series = [pair_correlation(restrict(cs, Region(r)), T, S_GRID) for r in ("plane", "halfplane", "quadrant")]
    gaps = [sup_distance(a, b) for i, a in enumerate(series) for b in series[i + 1:]]
    criterion("C8 region independence", "pairwise sup-norms " + ", ".join(f"{g:.4f}" for g in gaps) + " (bound 0.1)")
    assert max(gaps) <= 0.1


def test_c09_gasket_independence(criterion):
    T = 1000.0
    series = [pair_correlation(enumerate_circles(spec, T).centers, T, S_GRID) for spec in COMPARISON]
    gaps = [sup_distance(a, b) for i, a in enumerate(series) for b in series[i + 1:]]
    criterion("C9 gasket independence", "pairwise sup-norms " + ", ".join(f"{g:.4f}" for g in gaps) + " (bound 0.1)")
    assert max(gaps) <= 0.1


def test_c10_energy_convergence(criterion):
    G = {T: energy(enumerate_circles(DEFAULT_GASKET, T).centers, T).value for T in (250.0, 500.0, 1000.0)}
    changes = [abs(G[2 * T] - G[T]) / G[T] for T in (250.0, 500.0)]
    criterion("C10 energy convergence", "G " + ", ".join(f"{v:.5f}" for v in G.values())
              + "; changes " + ", ".join(f"{c:.4f}" for c in changes))
    assert all(v > 0 for v in G.values())
    assert max(changes) <= 0.1


def _sweep(out, threads):
    cmd = [sys.executable, "-m", "gasketstats.cli", "sweep", "--deterministic", "--threads", str(threads),
           "--out", str(out)]
    subprocess.run(cmd, check=True)
    return {p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*.csv"))}


def test_c11_determinism(criterion, tmp_path):
    one = _sweep(tmp_path / "t1", 1)
    eight = _sweep(tmp_path / "t8", 8)
    criterion("C11 determinism", f"{len(one)} CSV files compared")
    assert one.keys() == eight.keys() and len(one) > 0
    assert all(one[k] == eight[k] for k in one)
    TestArtifacts.sweep_dir = tmp_path / "t1"


class TestArtifacts:
    sweep_dir = None


def _read_series(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    return [(r["s"], r["value"]) for r in rows]


def test_c12_derivative_consistency(criterion, tmp_path):
    out = TestArtifacts.sweep_dir
    if out is None:
        out = tmp_path
        subprocess.run([sys.executable, "-m", "gasketstats.cli", "sweep", "--out", str(out)], check=True)
    checked = 0
    for dpath in sorted(Path(out).rglob("paircorr_deriv_*.csv")):
        F = _read_series(dpath.with_name(dpath.name.replace("paircorr_deriv_", "paircorr_")))
        fval = {float(s): float(v) for s, v in F}
        grid = sorted(fval)
        for s_text, v_text in _read_series(dpath):
            s = float(s_text)
            i = grid.index(s)
            j = min(range(len(grid)), key=lambda t: abs(grid[t] - (s + 0.1)))
            assert abs(grid[j] - (s + 0.1)) < 1e-9
            assert v_text == f"{(fval[grid[j]] - fval[s]) / 0.1:.12g}"
            checked += 1
    criterion("C12 derivative consistency", f"{checked} derivative values recomputed from emitted F")
    assert checked > 0
