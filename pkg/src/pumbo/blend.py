"""Shepard partition-of-unity weights and the blended global interpolant."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import IllConditioned
from .kernels import Family, KernelSpec
from .local import eval_local, fit_local
from .spatial import PointSet, SpatialIndex, SubdomainLayout


def bump(s):
    """Wendland C2 generator (1 - s)_+^4 (4 s + 1) on scaled distance s."""
    s = np.asarray(s, dtype=float)
    u = np.where(s < 1.0, 1.0 - s, 0.0)
    return u**4 * (4.0 * s + 1.0)


@dataclass
class WeightField:
    """Sparse Shepard weights in coordinate form, sorted by (target, subdomain).

    Only strictly positive weights are stored; a target with no entry is
    uncovered.
    """

    n_targets: int
    target: np.ndarray
    subdomain: np.ndarray
    weight: np.ndarray
    uncovered: np.ndarray

    def for_target(self, i: int) -> list[tuple[int, float]]:
        lo, hi = np.searchsorted(self.target, [i, i + 1])
        return list(zip(self.subdomain[lo:hi].tolist(), self.weight[lo:hi].tolist()))

    def sums(self) -> np.ndarray:
        return np.bincount(self.target, weights=self.weight, minlength=self.n_targets)

    def dense(self, m: int) -> np.ndarray:
        out = np.zeros((self.n_targets, m))
        out[self.target, self.subdomain] = self.weight
        return out


def _generator_values(tindex: SpatialIndex, layout: SubdomainLayout):
    """Per subdomain: (covered target indices, bump values > 0)."""
    out = []
    for c, r in zip(layout.centers, layout.radii):
        hits = tindex.query_radius(c, r)
        if hits.size:
            s = np.sqrt(np.sum((tindex.points[hits] - c) ** 2, axis=1)) / r
            psi = bump(s)
            keep = psi > 0
            hits, psi = hits[keep], psi[keep]
        else:
            psi = np.zeros(0)
        out.append((hits, psi))
    return out


def _weights_from_generators(n_targets: int, gens) -> tuple[np.ndarray, list]:
    denom = np.zeros(n_targets)
    for hits, psi in gens:
        np.add.at(denom, hits, psi)
    return denom, [(hits, psi / denom[hits]) for hits, psi in gens]


def shepard_weights(targets, layout: SubdomainLayout) -> WeightField:
    if np.any(layout.radii <= 0):
        raise ValueError("subdomain radii must be positive")
    t = np.atleast_2d(np.asarray(targets, dtype=float))
    gens = _generator_values(SpatialIndex(t), layout)
    denom, weights = _weights_from_generators(t.shape[0], gens)
    tgt = np.concatenate([h for h, _ in weights]) if weights else np.zeros(0, int)
    sub = np.concatenate([np.full(h.size, j) for j, (h, _) in enumerate(weights)])
    w = np.concatenate([w for _, w in weights])
    order = np.lexsort((sub, tgt))
    return WeightField(t.shape[0], tgt[order].astype(np.intp), sub[order].astype(np.intp),
                       w[order], np.flatnonzero(denom == 0))


@dataclass
class BlendDiagnostics:
    uncovered: np.ndarray
    clamped: int = 0
    jitter: np.ndarray = field(default_factory=lambda: np.zeros(0))
    n_nodes: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def all_zero_jitter(self) -> bool:
        return bool(np.all(self.jitter == 0))


def _specs_for(layout: SubdomainLayout, specs):
    if isinstance(specs, (Family, str)):
        return [KernelSpec(specs, float(e)) for e in layout.shapes]
    specs = list(specs)
    if len(specs) != layout.m:
        raise ValueError(f"{len(specs)} kernel specs for {layout.m} subdomains")
    return specs


def pum_evaluate(ps: PointSet, targets, layout: SubdomainLayout, idx: SpatialIndex,
                 specs) -> tuple[np.ndarray, BlendDiagnostics]:
    """Blend per-subdomain RBF interpolants with Shepard weights.

    ``specs`` is either one KernelSpec per subdomain or a kernel family, in
    which case ``layout.shapes`` supplies the shape parameters. Targets
    outside the unit cube are clamped; targets covered by no ball are
    evaluated with the nearest center's local model and reported.
    """
    if ps.values is None:
        raise ValueError("pum_evaluate needs data values")
    specs = _specs_for(layout, specs)
    t = np.atleast_2d(np.asarray(targets, dtype=float)).copy()
    n_t = t.shape[0]
    jitter = np.zeros(layout.m)
    n_nodes = np.zeros(layout.m, dtype=int)
    if n_t == 0 or t.size == 0:
        return np.zeros(0), BlendDiagnostics(np.zeros(0, dtype=np.intp), 0, jitter, n_nodes)
    outside = np.any((t < 0) | (t > 1), axis=1)
    if outside.any():
        warnings.warn(f"{int(outside.sum())} evaluation points outside [0,1]^d clamped",
                      stacklevel=2)
        np.clip(t, 0.0, 1.0, out=t)

    gens = _generator_values(SpatialIndex(t), layout)
    denom, weights = _weights_from_generators(n_t, gens)
    pred = np.zeros(n_t)

    def local_fit(j):
        nodes = idx.query_radius(layout.centers[j], layout.radii[j])
        n_nodes[j] = nodes.size
        if nodes.size == 0:
            return None
        try:
            model = fit_local(ps.points[nodes], ps.values[nodes], specs[j])
        except IllConditioned as exc:
            raise IllConditioned(f"subdomain {j}: {exc}") from exc
        jitter[j] = model.jitter_used
        return model

    # fixed subdomain order keeps the floating-point accumulation reproducible
    for j, (hits, w) in enumerate(weights):
        if hits.size == 0:
            n_nodes[j] = idx.query_radius(layout.centers[j], layout.radii[j]).size
            continue
        model = local_fit(j)
        if model is None:
            continue
        pred[hits] += eval_local(model, t[hits]) * w

    uncovered = np.flatnonzero(denom == 0)
    if uncovered.size:
        d2 = np.sum((t[uncovered, None, :] - layout.centers[None, :, :]) ** 2, axis=2)
        nearest = np.argmin(d2, axis=1)
        for j in np.unique(nearest):
            model = local_fit(int(j))
            sel = uncovered[nearest == j]
            if model is not None:
                pred[sel] = eval_local(model, t[sel])
    return pred, BlendDiagnostics(uncovered, int(outside.sum()), jitter, n_nodes)
