"""Fit a scattered survey file (e.g. lon, lat, depth) and report held-out errors.

The CSV needs a header ``x1,x2,f``. A seeded subset is used for training and
the rest for testing, as in a 7000 / 1113 split of 8113 soundings:

    python scripts/fit_survey.py soundings.csv --n-train 7000 --kernel matern
"""
import argparse
import logging

from pumbo.bench import load_csv, split_indices
from pumbo.bo import BoConfig
from pumbo.pipeline import fit_raw


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv")
    ap.add_argument("--n-train", type=int, required=True)
    ap.add_argument("--kernel", default="gaussian")
    ap.add_argument("--tau", type=float, default=1e-4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    data = load_csv(args.csv)
    if data.values is None:
        ap.error("the file needs an f column")
    tr, te = split_indices(data.n, args.n_train, args.seed)
    res, amap = fit_raw(data.points[tr], data.values[tr], data.points[te], args.kernel,
                        BoConfig(tau=args.tau, seed=args.seed), truth=data.values[te])
    print(f"train {tr.size}, test {te.size}, subdomains {res.layout.m}")
    for name, value in res.metrics.items():
        print(f"{name:>6}: {value:.3e}")
    print(f"excluded from relative metrics: {res.excluded_relative}")
    if amap.warnings:
        print("normalization:", "; ".join(amap.warnings))


if __name__ == "__main__":
    main()
