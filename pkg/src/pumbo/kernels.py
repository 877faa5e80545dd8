"""Radial basis functions phi(eps * r) and kernel matrices."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigError

EPS_MAX = 20.0


class Family(str, Enum):
    GAUSSIAN = "gaussian"
    MATERN_C4 = "matern"
    WENDLAND_C4 = "wendland"

    @classmethod
    def parse(cls, name) -> "Family":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower()
        aliases = {"gauss": "gaussian", "maternc4": "matern", "wendlandc4": "wendland",
                   "phi1": "gaussian", "phi2": "matern", "phi3": "wendland"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(
                f"unknown kernel {name!r}; choose from {[f.value for f in cls]}"
            ) from None


@dataclass(frozen=True)
class KernelSpec:
    family: Family
    epsilon: float
    eps_max: float = EPS_MAX

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if not (0.0 < self.epsilon <= self.eps_max) or not np.isfinite(self.epsilon):
            raise ConfigError(f"shape parameter {self.epsilon} outside (0, {self.eps_max}]")


def _phi(family: Family, t: np.ndarray) -> np.ndarray:
    if family is Family.GAUSSIAN:
        return np.exp(-t * t)
    if family is Family.MATERN_C4:
        # constant term 3, not 1: with 1 the function exceeds phi(0) near t=1
        # and is not positive definite
        return np.exp(-t) * (3.0 + 3.0 * t + t * t)
    # truncated power; explicit mask keeps exact zeros outside the support
    inside = t < 1.0
    u = np.where(inside, 1.0 - t, 0.0)
    return np.where(inside, (35.0 * t * t + 18.0 * t + 3.0) * u**6, 0.0)


def eval_rbf(spec: KernelSpec, r):
    """phi(eps * r) for scalar or array r >= 0."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ValueError("negative distance")
    out = _phi(spec.family, spec.epsilon * r_arr)
    return float(out) if out.ndim == 0 else out


def kernel_matrix(spec: KernelSpec, a, b) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != b.shape[1]:
        raise ConfigError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    if a.shape[0] == 0 or b.shape[0] == 0:
        return np.zeros((a.shape[0], b.shape[0]))
    return _phi(spec.family, spec.epsilon * cdist(a, b))
