"""Test-function benchmark grid: MAE / RMAE / RRMSE vs N for each kernel and tau.

    python scripts/benchmark_grid.py --fn f1 --out results/f1.csv
    python scripts/benchmark_grid.py --fn f2 --kernels gaussian,matern,wendland --seeds 3

With ``--seeds k`` every cell is repeated over seeds 0..k-1 and the median
of each error metric is reported next to the per-seed values.
"""
import argparse
import logging
from pathlib import Path

import numpy as np

from pumbo.bench import BenchConfig, run_benchmark, write_json, write_table
from pumbo.bo import BoConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--fn", default="f1", choices=["f1", "f2"])
    ap.add_argument("--kernels", default="gaussian")
    ap.add_argument("--sizes", default="2000,4000,8000,16000")
    ap.add_argument("--taus", default="1e-4,1e-5")
    ap.add_argument("--seeds", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results/table.csv"))
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    args.out.parent.mkdir(parents=True, exist_ok=True)
    all_rows = []
    for seed in range(args.seeds):
        cfg = BenchConfig(fn=args.fn, kernels=tuple(args.kernels.split(",")),
                          sizes=tuple(int(s) for s in args.sizes.split(",")),
                          taus=tuple(float(t) for t in args.taus.split(",")),
                          seed=seed, bo=BoConfig(seed=seed))
        rows = run_benchmark(cfg)
        for r in rows:
            r["seed"] = seed
        all_rows.extend(rows)
        write_table(rows, args.out.with_name(f"{args.out.stem}_seed{seed}.csv"), timing=True)
    write_json(all_rows, args.out.with_suffix(".json"))

    print(f"{'N':>6} {'tau':>7} {'kernel':>9} {'MAE':>10} {'RMAE':>10} {'RRMSE':>10}  (median over {args.seeds} seed(s))")
    keys = sorted({(r["N"], r["tau"], r["kernel"]) for r in all_rows}, key=lambda k: (k[2], -k[1], k[0]))
    for n, tau, kernel in keys:
        cell = [r for r in all_rows if (r["N"], r["tau"], r["kernel"]) == (n, tau, kernel) and r["status"] == "ok"]
        if not cell:
            print(f"{n:>6} {tau:>7.0e} {kernel:>9}   failed")
            continue
        med = {k: float(np.median([r[k] for r in cell])) for k in ("MAE", "RMAE", "RRMSE")}
        print(f"{n:>6} {tau:>7.0e} {kernel:>9} {med['MAE']:10.2e} {med['RMAE']:10.2e} {med['RRMSE']:10.2e}")


if __name__ == "__main__":
    main()
