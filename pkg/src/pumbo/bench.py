"""Test functions, CSV ingestion/emission and the benchmark driver."""
from __future__ import annotations

import csv
import io
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bo import BoConfig
from .errors import DataError, PumboError
from .kernels import Family
from .pipeline import bo_pum
from .spatial import PointSet

log = logging.getLogger(__name__)

TEST_SET_SIZE = 1000


def franke(x1, x2):
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return (0.75 * np.exp(-((9 * x1 - 2) ** 2) / 4 - ((9 * x2 - 2) ** 2) / 4)
            + 0.75 * np.exp(-((9 * x1 - 2) ** 2) / 49 - (9 * x2 + 1) / 10)
            + 0.5 * np.exp(-((9 * x1 - 7) ** 2) / 4 - ((9 * x2 - 3) ** 2) / 4)
            - 0.2 * np.exp(-((9 * x1 - 4) ** 2) - (9 * x2 - 7) ** 2))


def trig(x1, x2):
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return 2 * np.cos(10 * x1) * np.sin(10 * x2) + np.sin(10 * x1 * x2)


TEST_FUNCTIONS = {"f1": franke, "f2": trig}


def test_function(fn_id: str):
    try:
        return TEST_FUNCTIONS[fn_id]
    except KeyError:
        raise DataError(f"unknown test function {fn_id!r}; choose from {sorted(TEST_FUNCTIONS)}") from None


def gen_testdata(fn_id: str, n: int, seed) -> PointSet:
    """N uniform random points in the unit square with exact function values."""
    f = test_function(fn_id)
    if n < 1:
        raise DataError("N must be >= 1")
    pts = np.random.default_rng(seed).random((n, 2))
    return PointSet(pts, f(pts[:, 0], pts[:, 1]))


def _fmt(v: float) -> str:
    return repr(float(v)) if np.isfinite(v) else str(v)


def save_csv(ps: PointSet, path) -> None:
    """Write ``x1..xd[,f]``; repr() floats round-trip exactly."""
    header = [f"x{k + 1}" for k in range(ps.dim)] + (["f"] if ps.values is not None else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(ps.n):
            row = [_fmt(v) for v in ps.points[i]]
            if ps.values is not None:
                row.append(_fmt(ps.values[i]))
            w.writerow(row)


def load_csv(path) -> PointSet:
    """Read a ``x1,...,xd[,f]`` CSV into a PointSet.

    Errors name the 1-based file line. Duplicate rows with equal values are
    merged; conflicting duplicates are rejected.
    """
    try:
        text = Path(path).read_text(encoding="utf-8-sig")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or not any(c.strip() for c in rows[0]):
        raise DataError(f"{path}: missing header")
    header = [c.strip().lower() for c in rows[0]]
    has_f = header[-1] == "f"
    coord_cols = header[:-1] if has_f else header
    expected = [f"x{k + 1}" for k in range(len(coord_cols))]
    if not coord_cols or coord_cols != expected:
        raise DataError(f"{path}: line 1: header must be x1,...,xd[,f], got {','.join(header)}")
    data = []
    lines = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise DataError(f"{path}: line {lineno}: non-numeric cell") from None
        if not all(np.isfinite(vals)):
            raise DataError(f"{path}: line {lineno}: non-finite value")
        data.append(vals)
        lines.append(lineno)
    if not data:
        raise DataError(f"{path}: no data rows")
    arr = np.array(data)
    pts = arr[:, :-1] if has_f else arr
    values = arr[:, -1] if has_f else None
    try:
        return PointSet.from_arrays(pts, values, row_offset=2)
    except DataError as exc:
        raise DataError(f"{path}: {exc} (line numbers)") from None


def split_indices(n: int, n_train: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Seeded split into train/test without replacement (e.g. 7000/1113 of 8113)."""
    if not 0 < n_train < n:
        raise DataError(f"cannot take {n_train} training samples out of {n}")
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


@dataclass
class BenchConfig:
    fn: str = "f1"
    kernels: tuple[str, ...] = ("gaussian",)
    sizes: tuple[int, ...] = (2000, 4000, 8000, 16000)
    taus: tuple[float, ...] = (1e-4, 1e-5)
    seed: int = 0
    min_pts: int = 15
    test_size: int = TEST_SET_SIZE
    bo: BoConfig = field(default_factory=BoConfig)
    workers: int | None = None

    def __post_init__(self):
        test_function(self.fn)
        self.kernels = tuple(Family.parse(k).value for k in self.kernels)


COLUMNS = ["N", "tau", "kernel", "status", "MAE", "RMAE", "RRMSE", "excluded", "uncovered",
           "m", "evaluations"]


def run_benchmark(cfg: BenchConfig) -> list[dict]:
    """One bo_pum run per (N, tau, kernel) cell on a fixed test set.

    The test set depends only on the seed; each training set on (seed, N).
    Failed cells are recorded with their error instead of aborting the run.
    """
    test = gen_testdata(cfg.fn, cfg.test_size, [cfg.seed, 0])
    rows = []
    for n in cfg.sizes:
        train = gen_testdata(cfg.fn, n, [cfg.seed, 1, n])
        for tau in cfg.taus:
            for kernel in cfg.kernels:
                bo_cfg = BoConfig(**{**cfg.bo.__dict__, "tau": tau})
                row = {"N": n, "tau": tau, "kernel": kernel}
                t0 = time.perf_counter()
                try:
                    res = bo_pum(train, test.points, kernel, bo_cfg, cfg.min_pts,
                                 truth=test.values, workers=cfg.workers)
                except PumboError as exc:
                    log.warning("cell N=%d tau=%g %s failed: %s", n, tau, kernel, exc)
                    row.update(status=f"failed: {type(exc).__name__}", time_s=time.perf_counter() - t0)
                    rows.append(row)
                    continue
                row.update(status="ok", time_s=time.perf_counter() - t0,
                           MAE=res.metrics["MAE"], RMAE=res.metrics["RMAE"],
                           RRMSE=res.metrics["RRMSE"], excluded=res.excluded_relative,
                           uncovered=int(res.uncovered.size), m=res.layout.m,
                           evaluations=int(sum(len(t) for t in res.traces)),
                           timings=res.timings)
                log.info("N=%d tau=%g %s MAE=%.3e (%.1fs)", n, tau, kernel, row["MAE"], row["time_s"])
                rows.append(row)
    return rows


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_table(rows: list[dict], path, timing: bool = False) -> None:
    """CSV table with shortest round-trip floats; wall-clock time is only included when ``timing`` is set so
    that the default output is reproducible byte for byte."""
    cols = COLUMNS + (["time_s"] if timing else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in cols])


def write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, allow_nan=False, default=float)
        fh.write("\n")


def write_plot_data(rows: list[dict], directory) -> list[Path]:
    """One ``N,MAE`` series per (kernel, tau), for external plotting."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for kernel in sorted({r["kernel"] for r in rows}):
        for tau in sorted({r["tau"] for r in rows}):
            series = [r for r in rows if r["kernel"] == kernel and r["tau"] == tau and r["status"] == "ok"]
            path = out / f"mae_vs_n_{kernel}_tau{tau:g}.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["N", "MAE"])
                for r in sorted(series, key=lambda r: r["N"]):
                    w.writerow([r["N"], _cell(r["MAE"])])
            written.append(path)
    return written
