"""Time kd-tree construction and radius queries against an N log N model."""
import argparse
import math
import time

import numpy as np

from pumbo.spatial import build_index


def best_of(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="10000,100000,1000000")
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--queries", type=int, default=1000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    sizes = [int(s) for s in args.sizes.split(",")]
    base = None
    print(f"{'N':>9} {'build s':>9} {'ratio/NlogN':>12} {'query us':>9}")
    for n in sizes:
        pts = rng.random((n, args.dim))
        t_build = best_of(lambda: build_index(pts), args.repeats)
        idx = build_index(pts)
        # radius chosen so a ball holds about 30 points on average
        r = (30 / (n * math.pi)) ** 0.5 if args.dim == 2 else (30 / n) ** (1 / args.dim)
        centers = rng.random((args.queries, args.dim))
        t_query = best_of(lambda: [idx.query_radius(c, r) for c in centers], args.repeats)
        model = n * math.log(n)
        base = base or (t_build, model)
        ratio = (t_build / base[0]) / (model / base[1])
        print(f"{n:>9} {t_build:9.4f} {ratio:12.2f} {1e6 * t_query / args.queries:9.1f}")


if __name__ == "__main__":
    main()
