"""Point sets, kd-tree radius search and the partition-of-unity center grid."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError, DataError

LEAF_SIZE = 16
DUPLICATE_TOL = 1e-12


@dataclass
class PointSet:
    """N points in d dimensions with optional data values.

    Use :meth:`from_arrays` when the input may contain duplicate rows; the
    plain constructor only validates shapes.
    """

    points: np.ndarray
    values: np.ndarray | None = None

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.points.shape[0] == 0:
            raise DataError("point set is empty")
        if not np.all(np.isfinite(self.points)):
            raise DataError("non-finite coordinates")
        if self.values is not None:
            self.values = np.asarray(self.values, dtype=float).reshape(-1)
            if self.values.shape[0] != self.points.shape[0]:
                raise DataError(
                    f"{self.values.shape[0]} values for {self.points.shape[0]} points"
                )
            if not np.all(np.isfinite(self.values)):
                raise DataError("non-finite data values")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @classmethod
    def from_arrays(cls, points, values=None, row_offset=0) -> "PointSet":
        """Build a PointSet, merging duplicate points with agreeing values.

        Duplicates whose values differ by more than 1e-12 raise DataError
        naming the offending rows (``row_offset`` is added to 0-based row
        positions, so a CSV loader can report file line numbers).
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        _, first, inverse = np.unique(pts, axis=0, return_index=True, return_inverse=True)
        inverse = inverse.reshape(-1)
        if len(first) == len(pts):
            return cls(pts, values)
        if values is not None:
            vals = np.asarray(values, dtype=float).reshape(-1)
            ref = vals[first[inverse]]
            bad = np.flatnonzero(np.abs(vals - ref) > DUPLICATE_TOL)
            if bad.size:
                i = int(bad[0])
                j = int(first[inverse[i]])
                raise DataError(
                    f"duplicate point with conflicting values at rows "
                    f"{j + row_offset} and {i + row_offset}"
                )
        keep = np.sort(first)
        return cls(pts[keep], None if values is None else np.asarray(values, float)[keep])


@dataclass
class AffineMap:
    """Per-axis map ``x -> (x - lo) * scale``; degenerate axes map to 0.5."""

    lo: np.ndarray
    scale: np.ndarray
    degenerate: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    warnings: list[str] = field(default_factory=list)

    @classmethod
    def identity(cls, d: int) -> "AffineMap":
        return cls(np.zeros(d), np.ones(d), np.zeros(d, dtype=bool))

    @classmethod
    def fit(cls, points) -> "AffineMap":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        d = pts.shape[1]
        if np.all(pts >= 0.0) and np.all(pts <= 1.0):
            return cls.identity(d)
        lo = pts.min(axis=0)
        span = pts.max(axis=0) - lo
        degenerate = span == 0
        scale = np.where(degenerate, 1.0, 1.0 / np.where(degenerate, 1.0, span))
        msgs = [f"axis {k} is constant; mapped to 0.5" for k in np.flatnonzero(degenerate)]
        for m in msgs:
            warnings.warn(m, stacklevel=3)
        return cls(lo, scale, degenerate, msgs)

    @property
    def is_identity(self) -> bool:
        return bool(np.all(self.lo == 0) and np.all(self.scale == 1) and not self.degenerate.any())

    def apply(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = (pts - self.lo) * self.scale
        if self.degenerate.any():
            out[:, self.degenerate] = 0.5
        return out

    def invert(self, unit_points) -> np.ndarray:
        u = np.atleast_2d(np.asarray(unit_points, dtype=float))
        out = u / self.scale + self.lo
        if self.degenerate.any():
            out[:, self.degenerate] = self.lo[self.degenerate]
        return out


def normalize(points, values=None) -> tuple[PointSet, AffineMap]:
    """Rescale coordinates into the unit hypercube; values are left untouched.

    Points that already lie in [0, 1]^d get the identity map.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 0:
        raise DataError("cannot normalize an empty point list")
    if not np.all(np.isfinite(pts)):
        raise DataError("non-finite coordinates")
    amap = AffineMap.fit(pts)
    return PointSet(amap.apply(pts), values), amap


class SpatialIndex:
    """Immutable kd-tree over a point array supporting closed-ball queries.

    Median splits on the widest-spread axis with 16-point leaf buckets.
    Safe for concurrent read-only queries.
    """

    def __init__(self, points):
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.points.shape[0] == 0:
            raise ConfigError("cannot index an empty point set")
        self.leaf_size = LEAF_SIZE
        self._tree = cKDTree(self.points, leafsize=LEAF_SIZE, balanced_tree=True,
                             compact_nodes=True, copy_data=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def query_radius(self, center, r: float) -> np.ndarray:
        if r < 0:
            raise ConfigError(f"negative query radius {r}")
        hits = self._tree.query_ball_point(np.asarray(center, dtype=float), r)
        return np.array(sorted(hits), dtype=np.intp)

    def kth_distance(self, centers, k: int) -> np.ndarray:
        """Distance from each center to its k-th nearest indexed point."""
        dist, _ = self._tree.query(np.atleast_2d(centers), k=[k])
        return dist[:, 0]


def build_index(ps: PointSet | np.ndarray) -> SpatialIndex:
    return SpatialIndex(ps.points if isinstance(ps, PointSet) else ps)


def query_radius(idx: SpatialIndex, center, r: float) -> np.ndarray:
    return idx.query_radius(center, r)


@dataclass
class SubdomainLayout:
    """PU centers on a regular grid with per-subdomain radius and shape.

    ``shapes`` is 1.0 everywhere until tuned.
    """

    centers: np.ndarray
    radii: np.ndarray
    shapes: np.ndarray
    n_side: int
    min_pts: int = 15

    @property
    def m(self) -> int:
        return self.centers.shape[0]

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    @property
    def initial_radius(self) -> float:
        # half cell diagonal, equal to sqrt(d) / (2 m^(1/d))
        return math.sqrt(self.dim) / (2.0 * self.n_side)

    @property
    def radius_step(self) -> float:
        return self.initial_radius / 8.0


def make_pu_centers(n: int, d: int, min_pts: int = 15) -> SubdomainLayout:
    """Grid of roughly N / 2^d cell-centered subdomain centers in [0, 1]^d."""
    if d < 1:
        raise ConfigError(f"dimension must be >= 1, got {d}")
    if n < 2**d:
        raise ConfigError(f"need N >= 2^d = {2**d} points, got {n}")
    if min_pts < 1:
        raise ConfigError("min_pts must be >= 1")
    m_target = n // 2**d
    n_side = max(1, int(round(m_target ** (1.0 / d))))
    ticks = (np.arange(n_side) + 0.5) / n_side
    grids = np.meshgrid(*([ticks] * d), indexing="ij")
    centers = np.stack([g.ravel() for g in grids], axis=1)
    m = centers.shape[0]
    r0 = math.sqrt(d) / (2.0 * n_side)
    return SubdomainLayout(centers, np.full(m, r0), np.ones(m), n_side, min_pts)


def find_min_radius(ps: PointSet, layout: SubdomainLayout, idx: SpatialIndex) -> np.ndarray:
    """Smallest radius r0 + k*step (k >= 0) whose ball holds >= min_pts points.

    The step count is guessed from the min_pts-th neighbor distance and then
    corrected against actual ball counts, so the result equals the
    grow-until-dense loop evaluated on the progression ``r0 + k*step``.
    """
    k_req = layout.min_pts
    if k_req > ps.n:
        raise ConfigError(f"min_pts={k_req} exceeds the number of points {ps.n}")
    r0 = layout.initial_radius
    step = layout.radius_step
    cap = math.sqrt(layout.dim) + step
    kth = idx.kth_distance(layout.centers, k_req)
    out = np.empty(layout.m)
    for j, c in enumerate(layout.centers):
        k = 0 if kth[j] <= r0 else max(0, math.ceil((kth[j] - r0) / step))
        # step back while the previous radius still suffices, forward while short
        while k > 0 and idx.query_radius(c, r0 + (k - 1) * step).size >= k_req:
            k -= 1
        while idx.query_radius(c, r0 + k * step).size < k_req:
            k += 1
            if r0 + k * step > cap:
                raise ConfigError(f"radius search for subdomain {j} exceeded sqrt(d)")
        out[j] = r0 + k * step
    return out
