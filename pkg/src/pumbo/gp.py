"""Gaussian-process surrogate over the (eps, delta) search box.

Matern-5/2 covariance on box-normalized inputs, standardized outputs with a
zero prior mean, unit signal variance, and a length scale picked by
maximizing the log marginal likelihood over a fixed log grid.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cholesky, solve_triangular
from scipy.spatial.distance import cdist

from .errors import DataError, NumericalError

LENGTH_GRID = np.logspace(-2, 1, 25)
SIGNAL_VAR = 1.0
NOISE_VAR = 1e-8
NOISE_MAX = 1e-4
STD_FLOOR = 1e-12
_LOG_2PI = np.log(2.0 * np.pi)


def matern52(r, length: float, signal_var: float = SIGNAL_VAR):
    a = np.sqrt(5.0) * np.asarray(r, dtype=float) / length
    return signal_var * (1.0 + a + a * a / 3.0) * np.exp(-a)


@dataclass(frozen=True)
class GpModel:
    x: np.ndarray          # normalized observations, s x D
    y: np.ndarray          # standardized targets
    box: np.ndarray        # D x 2, (lo, hi) per input
    y_mean: float
    y_std: float
    length: float
    noise_var: float
    factor: np.ndarray     # lower Cholesky of K + noise I
    alpha: np.ndarray      # (K + noise I)^-1 y
    signal_var: float = SIGNAL_VAR
    lml: float = float("nan")

    @property
    def s(self) -> int:
        return self.x.shape[0]

    def to_unit(self, thetas) -> np.ndarray:
        th = np.atleast_2d(np.asarray(thetas, dtype=float))
        return (th - self.box[:, 0]) / (self.box[:, 1] - self.box[:, 0])

    def predict_standardized(self, thetas) -> tuple[np.ndarray, np.ndarray]:
        u = self.to_unit(thetas)
        ks = matern52(cdist(u, self.x), self.length, self.signal_var)
        mean = ks @ self.alpha
        v = solve_triangular(self.factor, ks.T, lower=True, check_finite=False)
        var = self.signal_var - np.sum(v * v, axis=0)
        return mean, np.sqrt(np.maximum(var, 0.0))

    def predict(self, thetas) -> tuple[np.ndarray, np.ndarray]:
        mean, std = self.predict_standardized(thetas)
        return mean * self.y_std + self.y_mean, std * self.y_std


def _default_box(x: np.ndarray) -> np.ndarray:
    lo, hi = x.min(axis=0), x.max(axis=0)
    hi = np.where(hi > lo, hi, lo + 1.0)
    return np.stack([lo, hi], axis=1)


def _lml_grid(dist: np.ndarray, y: np.ndarray, lengths: np.ndarray, noise: float):
    """Cholesky factor and log marginal likelihood for each length scale."""
    s = y.shape[0]
    ks = matern52(dist[None, :, :], lengths[:, None, None])
    ks[:, np.arange(s), np.arange(s)] += noise
    try:
        lows = np.linalg.cholesky(ks)
    except np.linalg.LinAlgError:
        pass
    else:
        alphas = np.linalg.solve(ks, np.broadcast_to(y, (len(lengths), s))[..., None])[..., 0]
        half_logdet = np.sum(np.log(np.diagonal(lows, axis1=1, axis2=2)), axis=1)
        lmls = -0.5 * alphas @ y - half_logdet - 0.5 * s * _LOG_2PI
        return [(lmls[i], lows[i], alphas[i]) for i in range(len(lengths))]
    # some length scale failed: redo one at a time
    results = []
    for length in lengths:
        k = matern52(dist, length)
        k[np.diag_indices(s)] += noise
        try:
            low = cholesky(k, lower=True, check_finite=False)
        except LinAlgError:
            results.append(None)
            continue
        alpha = solve_triangular(low.T, solve_triangular(low, y, lower=True), lower=False)
        lml = -0.5 * y @ alpha - np.sum(np.log(np.diag(low))) - 0.5 * s * _LOG_2PI
        results.append((lml, low, alpha))
    return results


def gp_fit(thetas, values, box=None, length_scale: float | None = None) -> GpModel:
    """Condition the GP on observed (theta, value) pairs.

    Parameters
    ----------
    thetas : array, shape (s, D)
    values : array, shape (s,)
    box : array, shape (D, 2), optional
        Search box used to normalize inputs to the unit cube. Defaults to
        the bounding box of ``thetas``.
    length_scale : float, optional
        Fix the length scale instead of searching the grid.
    """
    x = np.atleast_2d(np.asarray(thetas, dtype=float))
    g = np.asarray(values, dtype=float).reshape(-1)
    if x.shape[0] == 0 or x.shape[0] != g.shape[0]:
        raise DataError(f"need matching nonempty thetas/values, got {x.shape[0]}/{g.shape[0]}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(g))):
        raise DataError("non-finite GP observations")
    box = _default_box(x) if box is None else np.asarray(box, dtype=float)
    unit = (x - box[:, 0]) / (box[:, 1] - box[:, 0])
    y_mean = float(np.mean(g))
    y_std = max(float(np.std(g)), STD_FLOOR)
    y = (g - y_mean) / y_std
    dist = cdist(unit, unit)
    lengths = LENGTH_GRID if length_scale is None else np.array([float(length_scale)])

    noise = NOISE_VAR
    while noise <= NOISE_MAX * (1 + 1e-9):
        results = _lml_grid(dist, y, lengths, noise)
        ok = [i for i, r in enumerate(results) if r is not None]
        if ok:
            best = max(ok, key=lambda i: (results[i][0], -i))
            lml, low, _ = results[best]
            # prediction weights always come from the Cholesky factor
            alpha = solve_triangular(low.T, solve_triangular(low, y, lower=True), lower=False)
            return GpModel(unit, y, box, y_mean, y_std, float(lengths[best]), noise,
                           low, alpha, SIGNAL_VAR, float(lml))
        noise *= 10.0
    raise NumericalError(f"GP covariance not factorizable with noise up to {NOISE_MAX:g}")


def gp_predict(model: GpModel, theta):
    """Posterior (mean, std) in original units; scalars for a single theta."""
    mean, std = model.predict(theta)
    if np.ndim(theta) == 1:
        return float(mean[0]), float(std[0])
    return mean, std
