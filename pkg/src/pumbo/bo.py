"""Per-subdomain Bayesian optimization of (eps, delta) with Expected Improvement."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from .errors import ConfigError, IllConditioned, SubdomainSearchFailed
from .gp import GpModel, gp_fit
from .kernels import EPS_MAX, Family, KernelSpec
from .local import eval_local, fit_local
from .spatial import PointSet, SpatialIndex

EPS_MIN = 1e-6
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

OK = "ok"
ILL = "ill-conditioned"
DEGENERATE = "degenerate-split"


@dataclass(frozen=True)
class BoConfig:
    eps_max: float = EPS_MAX
    nstart: int = 5
    niter: int = 25
    xi: float = 0.15
    tau: float = 1e-4
    n_candidates: int = 2048
    split_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.nstart < 1:
            raise ConfigError("nstart must be >= 1")
        if self.niter < 0:
            raise ConfigError("niter must be >= 0")
        if not 0.0 < self.split_fraction < 1.0:
            raise ConfigError("split_fraction must lie in (0, 1)")
        if not self.eps_max > EPS_MIN:
            raise ConfigError(f"eps_max must exceed {EPS_MIN}")
        if self.xi < 0:
            raise ConfigError("xi must be nonnegative")
        if self.tau < 0:
            raise ConfigError("tau must be nonnegative")
        if self.n_candidates < 1:
            raise ConfigError("n_candidates must be >= 1")

    @property
    def budget(self) -> int:
        return self.nstart + self.niter


@dataclass
class BoTrace:
    thetas: list = field(default_factory=list)
    g: list = field(default_factory=list)
    status: list = field(default_factory=list)
    n_sub: list = field(default_factory=list)
    n_val: list = field(default_factory=list)
    best: int = -1

    def __len__(self):
        return len(self.g)

    def incumbent(self) -> np.ndarray:
        """Running max of g over ok trials (-inf before the first ok trial)."""
        vals = np.where(np.array(self.status) == OK, np.array(self.g, dtype=float), -np.inf)
        return np.maximum.accumulate(vals) if vals.size else vals

    def to_dict(self) -> dict:
        return {
            "thetas": [list(map(float, t)) for t in self.thetas],
            "g": [float(v) if np.isfinite(v) else None for v in self.g],
            "status": list(self.status),
            "n_sub": list(self.n_sub),
            "n_val": list(self.n_val),
            "best": self.best,
        }


def expected_improvement(mean, std, best, xi=0.0):
    """Closed-form EI of a normal prediction over ``best + xi``; 0 where std == 0."""
    mean = np.asarray(mean, dtype=float)
    std = np.asarray(std, dtype=float)
    if np.any(std < 0):
        raise ValueError("negative standard deviation")
    imp = mean - best - xi
    pos = std > 0
    z = np.divide(imp, std, out=np.zeros(np.broadcast(imp, std).shape), where=pos)
    cdf = 0.5 * erfc(-z / math.sqrt(2.0))
    pdf = _INV_SQRT_2PI * np.exp(-0.5 * z * z)
    ei = np.where(pos, imp * cdf + std * pdf, 0.0)
    ei = np.maximum(ei, 0.0)
    return float(ei) if ei.ndim == 0 else ei


def search_box(delta_start: float, cfg: BoConfig) -> np.ndarray:
    return np.array([[EPS_MIN, cfg.eps_max], [delta_start, 2.0 * delta_start]])


def _uniform(box: np.ndarray, rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(box[:, 0], box[:, 1], size=(n, box.shape[0]))


def propose_next(model: GpModel, box, best: float, cfg: BoConfig,
                 rng: np.random.Generator) -> np.ndarray:
    """Best-EI point among ``cfg.n_candidates`` uniform draws in the box.

    EI is scored on the surrogate's standardized scale, so ``xi`` is in
    units of the observed objective's standard deviation. Ties go to the
    lowest candidate index.
    """
    box = np.asarray(box, dtype=float)
    cand = _uniform(box, rng, cfg.n_candidates)
    mean, std = model.predict_standardized(cand)
    best_std = (best - model.y_mean) / model.y_std
    ei = expected_improvement(mean, std, best_std, cfg.xi)
    return cand[int(np.argmax(ei))]


def subdomain_rng(seed: int, subdomain: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(subdomain)])


def bo_search(ps: PointSet, center, delta_start: float, cfg: BoConfig, idx: SpatialIndex,
              family=Family.GAUSSIAN, subdomain: int = 0):
    """Tune (eps, delta) for one subdomain; returns (theta_star, trace).

    The objective is minus the max absolute validation error of a local
    fit. Each point in the largest admissible ball gets a fixed random
    priority; for a trial ball the lowest-priority fraction forms the
    validation set, so splits stay consistent across trials. The loop ends
    after ``cfg.budget`` trials or once the best validation error is within
    ``cfg.tau``.
    """
    if ps.values is None:
        raise ConfigError("bo_search needs data values")
    family = Family.parse(family)
    rng = subdomain_rng(cfg.seed, subdomain)
    center = np.asarray(center, dtype=float)
    box = search_box(delta_start, cfg)

    ball = idx.query_radius(center, box[1, 1])
    d2 = np.sum((ps.points[ball] - center) ** 2, axis=1)
    priority = rng.random(ball.size)

    trace = BoTrace()
    model = None
    best_g = -np.inf
    for i in range(cfg.budget):
        if i < cfg.nstart or model is None:
            theta = _uniform(box, rng, 1)[0]
        else:
            theta = propose_next(model, box, best_g, cfg, rng)
        eps, delta = float(theta[0]), float(theta[1])

        inside = d2 <= delta * delta
        members = ball[inside]
        n = members.size
        n_val = int(round(cfg.split_fraction * n))
        trace.thetas.append(np.array(theta))
        trace.n_sub.append(int(n))
        trace.n_val.append(n_val)
        if n_val < 2 or n - n_val < 1:
            trace.g.append(-np.inf)
            trace.status.append(DEGENERATE)
            continue
        order = np.argsort(priority[inside], kind="stable")
        val, train = members[order[:n_val]], members[order[n_val:]]
        try:
            local = fit_local(ps.points[train], ps.values[train], KernelSpec(family, eps, cfg.eps_max))
        except IllConditioned:
            trace.g.append(-np.inf)
            trace.status.append(ILL)
            continue
        err = np.max(np.abs(eval_local(local, ps.points[val]) - ps.values[val]))
        g = -float(err)
        trace.g.append(g)
        trace.status.append(OK)
        if g > best_g:
            best_g = g
            trace.best = len(trace.g) - 1
        if -best_g <= cfg.tau:
            break
        if i + 1 >= cfg.nstart and i + 1 < cfg.budget:
            ok = [k for k, s in enumerate(trace.status) if s == OK]
            model = gp_fit(np.array([trace.thetas[k] for k in ok]),
                           np.array([trace.g[k] for k in ok]), box)

    if trace.best < 0:
        raise SubdomainSearchFailed(
            f"subdomain {subdomain}: all {len(trace)} trials failed", subdomain, trace
        )
    return tuple(float(v) for v in trace.thetas[trace.best]), trace
