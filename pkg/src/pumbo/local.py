"""Local RBF interpolant on one subdomain: solve K c = f, evaluate sum c_k phi."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import ConfigError, IllConditioned
from .kernels import KernelSpec, kernel_matrix

# 0, then 1e-12 .. 1e-6 times the mean diagonal of K
JITTER_LADDER = (0.0,) + tuple(10.0**k for k in range(-12, -5))
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class LocalModel:
    nodes: np.ndarray
    coeffs: np.ndarray
    spec: KernelSpec
    jitter_used: float = 0.0


def fit_local(nodes, values, spec: KernelSpec) -> LocalModel:
    """Solve (K + jitter I) c = f by Cholesky, escalating jitter on failure.

    A rung is accepted only if the factorization succeeds and the residual
    of the regularized system satisfies ``||r||_inf <= 1e-8 (1 + ||f||_inf)``.
    """
    x = np.atleast_2d(np.asarray(nodes, dtype=float))
    f = np.asarray(values, dtype=float).reshape(-1)
    if x.shape[0] == 0:
        raise ConfigError("fit_local needs at least one node")
    if f.shape[0] != x.shape[0]:
        raise ConfigError(f"{f.shape[0]} values for {x.shape[0]} nodes")
    k = kernel_matrix(spec, x, x)
    n = k.shape[0]
    tau = np.trace(k) / n
    tol = RESIDUAL_TOL * (1.0 + np.max(np.abs(f)))
    diag = np.arange(n)
    for rung in JITTER_LADDER:
        jitter = rung * tau
        kj = k.copy()
        kj[diag, diag] += jitter
        try:
            factor = cho_factor(kj, lower=True, check_finite=False)
        except LinAlgError:
            continue
        c = cho_solve(factor, f, check_finite=False)
        if np.all(np.isfinite(c)) and np.max(np.abs(kj @ c - f)) <= tol:
            return LocalModel(x, c, spec, jitter)
    raise IllConditioned(
        f"kernel system with {n} nodes ({spec.family.value}, eps={spec.epsilon:.4g}) "
        f"not solvable at jitter {JITTER_LADDER[-1]:g}*tau"
    )


def eval_local(model: LocalModel, targets) -> np.ndarray:
    t = np.asarray(targets, dtype=float)
    if t.size == 0:
        return np.zeros(0)
    return kernel_matrix(model.spec, np.atleast_2d(t), model.nodes) @ model.coeffs
