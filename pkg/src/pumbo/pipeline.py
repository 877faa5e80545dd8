"""End-to-end BO-PUM fit: centers, minimum radii, per-subdomain BO, final blend."""
from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .blend import BlendDiagnostics, pum_evaluate
from .bo import BoConfig, BoTrace, bo_search
from .errors import ConfigError, DataError
from .kernels import Family, KernelSpec
from .spatial import (AffineMap, PointSet, SpatialIndex, SubdomainLayout, build_index,
                      find_min_radius, make_pu_centers)

log = logging.getLogger(__name__)

ZERO_TRUTH = 1e-12


def _check_pair(truth, pred):
    t = np.asarray(truth, dtype=float).reshape(-1)
    p = np.asarray(pred, dtype=float).reshape(-1)
    if t.shape != p.shape:
        raise ValueError(f"length mismatch: {t.size} truth vs {p.size} predictions")
    if t.size == 0:
        raise ValueError("metrics need at least one value")
    return t, p


def mae(truth, pred) -> float:
    t, p = _check_pair(truth, pred)
    return float(np.max(np.abs(p - t)))


def _relative(truth, pred):
    t, p = _check_pair(truth, pred)
    keep = np.abs(t) >= ZERO_TRUTH
    if not keep.any():
        raise ValueError("relative error undefined: every truth value is ~0")
    return np.abs(p[keep] - t[keep]) / np.abs(t[keep]), int((~keep).sum())


def rmae(truth, pred) -> tuple[float, int]:
    """Max relative error over |truth| >= 1e-12, plus the excluded count."""
    rel, excluded = _relative(truth, pred)
    return float(np.max(rel)), excluded


def rrmse(truth, pred) -> tuple[float, int]:
    rel, excluded = _relative(truth, pred)
    return float(np.sqrt(np.mean(rel * rel))), excluded


def default_workers() -> int:
    env = os.environ.get("PUMBO_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"PUMBO_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ConfigError("PUMBO_THREADS must be >= 1")
        return n
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1


@dataclass
class FitResult:
    layout: SubdomainLayout
    delta_start: np.ndarray
    predictions: np.ndarray
    traces: list[BoTrace]
    timings: dict[str, float]
    diagnostics: BlendDiagnostics
    metrics: dict[str, float] | None = None
    excluded_relative: int = 0
    family: Family = Family.GAUSSIAN

    @property
    def uncovered(self) -> np.ndarray:
        return self.diagnostics.uncovered

    def to_dict(self) -> dict:
        return {
            "kernel": self.family.value,
            "m": self.layout.m,
            "n_side": self.layout.n_side,
            "min_pts": self.layout.min_pts,
            "centers": self.layout.centers.tolist(),
            "epsilon": self.layout.shapes.tolist(),
            "delta": self.layout.radii.tolist(),
            "delta_start": self.delta_start.tolist(),
            "predictions": self.predictions.tolist(),
            "metrics": self.metrics,
            "excluded_relative": self.excluded_relative,
            "uncovered": self.uncovered.tolist(),
            "clamped": self.diagnostics.clamped,
            "jitter": self.diagnostics.jitter.tolist(),
            "timings": self.timings,
            "traces": [t.to_dict() for t in self.traces],
        }


# worker-process state, set once per process by the pool initializer
_WORKER: dict = {}


def _init_worker(points, values, family, cfg):
    ps = PointSet(points, values)
    _WORKER.update(ps=ps, idx=SpatialIndex(points), family=family, cfg=cfg)


def _search_many(tasks):
    w = _WORKER
    return [bo_search(w["ps"], c, d, w["cfg"], w["idx"], w["family"], j) for j, c, d in tasks]


def _run_searches(ps, idx, layout, delta_start, family, cfg, workers):
    tasks = [(j, layout.centers[j], float(delta_start[j])) for j in range(layout.m)]
    if workers <= 1 or layout.m < 2:
        return [bo_search(ps, c, d, cfg, idx, family, j) for j, c, d in tasks]
    n_chunks = min(len(tasks), 4 * workers)
    chunks = [tasks[k::n_chunks] for k in range(n_chunks)]
    with ProcessPoolExecutor(workers, initializer=_init_worker,
                             initargs=(ps.points, ps.values, family, cfg)) as pool:
        parts = list(pool.map(_search_many, chunks))
    out = [None] * len(tasks)
    for k, part in enumerate(parts):
        for pos, res in zip(range(k, len(tasks), n_chunks), part):
            out[pos] = res
    return out


def bo_pum(train: PointSet, eval_points, kernel_family=Family.GAUSSIAN,
           cfg: BoConfig | None = None, min_pts: int = 15, truth=None,
           workers: int | None = None) -> FitResult:
    """Fit a BO-tuned RBF partition-of-unity interpolant and evaluate it.

    ``train`` must already lie in [0, 1]^d (see :func:`fit_raw` otherwise).
    Results depend only on ``cfg.seed``, never on ``workers``.
    """
    cfg = cfg or BoConfig()
    family = Family.parse(kernel_family)
    if train.values is None:
        raise DataError("training set has no data values")
    if np.any(train.points < 0) or np.any(train.points > 1):
        raise DataError("training points must lie in [0,1]^d; normalize first")
    n, d = train.n, train.dim
    if min_pts > n:
        raise ConfigError(f"min_pts={min_pts} exceeds N={n}")
    eval_points = np.atleast_2d(np.asarray(eval_points, dtype=float))
    if eval_points.size and eval_points.shape[1] != d:
        raise DataError(f"evaluation points have dimension {eval_points.shape[1]}, expected {d}")
    workers = default_workers() if workers is None else workers

    timings = {}
    t0 = time.perf_counter()
    layout = make_pu_centers(n, d, min_pts)
    idx = build_index(train)
    delta_start = find_min_radius(train, layout, idx)
    timings["radius_search"] = time.perf_counter() - t0
    log.info("m=%d subdomains, initial radius %.4g", layout.m, layout.initial_radius)

    t0 = time.perf_counter()
    results = _run_searches(train, idx, layout, delta_start, family, cfg, workers)
    timings["bo"] = time.perf_counter() - t0
    thetas = np.array([r[0] for r in results])
    traces = [r[1] for r in results]
    tuned = replace(layout, shapes=thetas[:, 0].copy(), radii=thetas[:, 1].copy())

    t0 = time.perf_counter()
    specs = [KernelSpec(family, e, cfg.eps_max) for e in tuned.shapes]
    pred, diag = pum_evaluate(train, eval_points, tuned, idx, specs)
    timings["blend"] = time.perf_counter() - t0
    timings["total"] = timings["radius_search"] + timings["bo"] + timings["blend"]

    result = FitResult(tuned, delta_start, pred, traces, timings, diag, family=family)
    if truth is not None:
        result.metrics, result.excluded_relative = evaluate_metrics(truth, pred)
    return result


def evaluate_metrics(truth, pred) -> tuple[dict, int]:
    metrics = {"MAE": mae(truth, pred)}
    excluded = 0
    try:
        metrics["RMAE"], excluded = rmae(truth, pred)
        metrics["RRMSE"], _ = rrmse(truth, pred)
    except ValueError:
        metrics["RMAE"] = metrics["RRMSE"] = None
        excluded = int(np.size(truth))
    return metrics, excluded


def fit_raw(points, values, eval_points, kernel_family=Family.GAUSSIAN,
            cfg: BoConfig | None = None, min_pts: int = 15, truth=None,
            workers: int | None = None) -> tuple[FitResult, AffineMap]:
    """:func:`bo_pum` on data in arbitrary units.

    The affine map is fitted on training and evaluation points together so
    that evaluation points land inside the unit cube.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    ev = np.atleast_2d(np.asarray(eval_points, dtype=float))
    amap = AffineMap.fit(np.vstack([pts, ev]) if ev.size else pts)
    train = PointSet.from_arrays(amap.apply(pts), values)
    result = bo_pum(train, amap.apply(ev) if ev.size else ev, kernel_family, cfg, min_pts,
                    truth, workers)
    return result, amap

