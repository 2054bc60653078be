"""Time each hot kernel under every importable backend.

    python benchmarks/bench_kernels.py [--T 10000] [--energy-T 2000] [--threads 1] [--repeat 3]
"""

import argparse
import time

from gasketstats import kernels
from gasketstats.enumerate import enumerate_circles
from gasketstats.geometry import GasketSpec
from gasketstats.spatial import build_grid, nearest_distances, pair_distances
from gasketstats.statistics import inverse_distance_sum

SPEC = GasketSpec.from_pi_multiples(1.8 / 3, 3.7 / 3)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=float, default=1e4)
    ap.add_argument("--energy-T", type=float, default=2000.0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    pts = enumerate_circles(SPEC, args.T).centers
    epts = enumerate_circles(SPEC, args.energy_T).centers
    radius = 20.0 / args.T
    grid = build_grid(pts, radius * (1 + 1e-6))
    cases = {
        f"enumerate T={args.T:g} (full checks)": lambda: enumerate_circles(SPEC, args.T, check="all"),
        f"pair search s<20, n={len(pts)}": lambda: pair_distances(grid, radius, args.threads),
        f"nearest, n={len(pts)}": lambda: nearest_distances(pts, 1.0 / args.T, args.threads),
        f"energy, n={len(epts)}": lambda: inverse_distance_sum(epts, args.threads),
    }
    backends = kernels.available()
    print(f"{'kernel':<40}" + "".join(f"{name:>12}" for name in backends) + f"{'speedup':>10}")
    saved = kernels.impl
    try:
        for label, fn in cases.items():
            row = {}
            for name, impl in backends.items():
                kernels.impl = impl
                row[name] = best_of(fn, args.repeat)
            speed = row["python"] / row["cython"] if "cython" in row else float("nan")
            print(f"{label:<40}" + "".join(f"{row[n]:>11.4f}s" for n in backends) + f"{speed:>9.1f}x")
    finally:
        kernels.impl = saved


if __name__ == "__main__":
    main()
