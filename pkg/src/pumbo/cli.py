"""Command line for pumbo: gen, fit and bench.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path


from .bench import (BenchConfig, gen_testdata, load_csv, run_benchmark, save_csv, write_json,
                    write_plot_data, write_table)
from .bo import BoConfig
from .errors import ConfigError, DataError, PumboError
from .kernels import Family
from .pipeline import default_workers, fit_raw

log = logging.getLogger("pumbo")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _csv_list(cast):
    def parse(text):
        try:
            items = [cast(t) for t in text.split(",") if t.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
        if not items:
            raise argparse.ArgumentTypeError("empty list")
        return items
    return parse


def _add_bo_args(p):
    d = BoConfig()
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-pts", type=int, default=15)
    p.add_argument("--nstart", type=int, default=d.nstart)
    p.add_argument("--niter", type=int, default=d.niter)
    p.add_argument("--xi", type=float, default=d.xi)
    p.add_argument("--eps-max", type=float, default=d.eps_max)
    p.add_argument("--n-candidates", type=int, default=d.n_candidates)
    p.add_argument("--split-fraction", type=float, default=d.split_fraction)


def _bo_config(args, tau) -> BoConfig:
    return BoConfig(eps_max=args.eps_max, nstart=args.nstart, niter=args.niter, xi=args.xi,
                    tau=tau, n_candidates=args.n_candidates,
                    split_fraction=args.split_fraction, seed=args.seed)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pumbo", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="sample a test function at random points")
    g.add_argument("--fn", required=True, choices=["f1", "f2"])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path, required=True)

    f = sub.add_parser("fit", parents=[common], help="fit on a training CSV, predict at an evaluation CSV")
    f.add_argument("--train", type=Path, required=True)
    f.add_argument("--eval", type=Path, required=True)
    f.add_argument("--kernel", default="gaussian")
    f.add_argument("--tau", type=float, default=1e-4)
    f.add_argument("--out", type=Path, required=True)
    _add_bo_args(f)

    b = sub.add_parser("bench", parents=[common], help="run the test-function benchmark grid")
    b.add_argument("--fn", default="f1", choices=["f1", "f2"])
    b.add_argument("--kernels", type=_csv_list(str), default=["gaussian"])
    b.add_argument("--sizes", type=_csv_list(int), default=[2000, 4000, 8000, 16000])
    b.add_argument("--taus", type=_csv_list(float), default=[1e-4, 1e-5])
    b.add_argument("--test-size", type=int, default=1000)
    b.add_argument("--out", type=Path, required=True)
    b.add_argument("--json", type=Path, default=None,
                   help="full per-cell results incl. timings (default: OUT with .json suffix)")
    b.add_argument("--plot-data", type=Path, default=None, metavar="DIR")
    b.add_argument("--timing", action="store_true", help="add a wall-clock time_s column to the CSV")
    _add_bo_args(b)
    return parser


def cmd_gen(args) -> None:
    save_csv(gen_testdata(args.fn, args.n, args.seed), args.out)


def cmd_fit(args) -> None:
    family = Family.parse(args.kernel)
    cfg = _bo_config(args, args.tau)
    train = load_csv(args.train)
    if train.values is None:
        raise DataError(f"{args.train}: training file needs an f column")
    ev = load_csv(args.eval)
    if ev.dim != train.dim:
        raise DataError(f"dimension mismatch: train {train.dim}, eval {ev.dim}")
    result, amap = fit_raw(train.points, train.values, ev.points, family, cfg, args.min_pts,
                           truth=ev.values, workers=default_workers())
    payload = result.to_dict()
    payload["eval_points"] = ev.points.tolist()
    payload["affine_map"] = {"lo": amap.lo.tolist(), "scale": amap.scale.tolist(),
                             "degenerate": amap.degenerate.tolist(), "warnings": amap.warnings}
    write_json(payload, args.out)
    if result.metrics:
        log.info("MAE=%.3e", result.metrics["MAE"])


def cmd_bench(args) -> None:
    kernels = [Family.parse(k).value for k in args.kernels]
    if any(n < 1 for n in args.sizes):
        raise ConfigError("sizes must be positive")
    cfg = BenchConfig(fn=args.fn, kernels=tuple(kernels), sizes=tuple(args.sizes),
                      taus=tuple(args.taus), seed=args.seed, min_pts=args.min_pts,
                      test_size=args.test_size, bo=_bo_config(args, args.taus[0]),
                      workers=default_workers())
    rows = run_benchmark(cfg)
    write_table(rows, args.out, timing=args.timing)
    write_json(rows, args.json or args.out.with_suffix(".json"))
    if args.plot_data is not None:
        write_plot_data(rows, args.plot_data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"gen": cmd_gen, "fit": cmd_fit, "bench": cmd_bench}[args.command]
    try:
        handler(args)
    except PumboError as exc:
        print(f"pumbo: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"pumbo: {exc}", file=sys.stderr)
        return DataError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
