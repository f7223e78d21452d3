"""Query-dependent subsets of the data pairs.

Each downsampler is configured once, ``prepare``d against a regressor
dataset, and the prepared state's ``select(query)`` returns the pair indices
to use for a regressor query.  Any subset gives looser envelopes, so
downsampling trades invalidation power for smaller programs without ever
invalidating something the full data would not.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dataset import RegressorDataset


def _nearest(data: RegressorDataset, query, count: int) -> np.ndarray:
    dist = kernels.distances(data.S, np.asarray(query, dtype=float), data.p)
    return np.argsort(dist, kind="stable")[:count]


# --------------------------------------------------------------------------
# grid

@dataclass(frozen=True)
class GridDownsampler:
    """Uniform grid over the regressor box with ``cells_per_dim`` cells per axis.

    The number of cells grows as ``cells_per_dim ** n``; only occupied cells
    are stored.
    """

    cells_per_dim: int
    boundary_extras: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.cells_per_dim < 1:
            raise ValueError("cells_per_dim must be positive")
        if self.boundary_extras < 0:
            raise ValueError("boundary_extras must be nonnegative")

    def prepare(self, data: RegressorDataset) -> "GridState":
        if len(data) == 0:
            raise ValueError("cannot downsample an empty dataset")
        lo, hi = data.domain.regressor_box(data.n_y)
        cells: dict[tuple, list] = {}
        for idx, key in enumerate(_cell_keys(data.S, lo, hi, self.cells_per_dim)):
            cells.setdefault(key, []).append(idx)
        frozen = {k: np.array(v, dtype=np.int64) for k, v in cells.items()}
        return GridState(self, data, lo, hi, frozen)


def _cell_keys(points: np.ndarray, lo, hi, cells: int):
    """Cell index per point; a point on a shared face goes to the lower cell."""
    width = np.where(hi > lo, hi - lo, 1.0)
    rel = (np.asarray(points, dtype=float) - lo) / width * cells
    idx = np.ceil(rel).astype(np.int64) - 1
    idx = np.clip(idx, 0, cells - 1)
    return [tuple(int(c) for c in row) for row in np.atleast_2d(idx)]


@dataclass(frozen=True)
class GridState:
    config: GridDownsampler
    data: RegressorDataset
    lo: np.ndarray
    hi: np.ndarray
    cells: dict

    def cell_of(self, query) -> tuple:
        return _cell_keys(np.atleast_2d(query), self.lo, self.hi, self.config.cells_per_dim)[0]

    def neighbors(self, cell: tuple) -> list:
        out = []
        for axis, step in itertools.product(range(len(cell)), (-1, 1)):
            c = list(cell)
            c[axis] += step
            if 0 <= c[axis] < self.config.cells_per_dim:
                out.append(tuple(c))
        return out

    def select(self, query) -> np.ndarray:
        cell = self.cell_of(query)
        own = self.cells.get(cell)
        if own is None:
            own = _nearest(self.data, query, 1)
        chosen = set(int(i) for i in own)
        if self.config.boundary_extras:
            pool = [int(i) for c in self.neighbors(cell) for i in self.cells.get(c, ())]
            pool = sorted(set(pool) - chosen)
            if pool:
                rng = np.random.default_rng([self.config.seed, *(c + 1 for c in cell)])
                take = min(self.config.boundary_extras, len(pool))
                chosen.update(int(i) for i in rng.choice(pool, size=take, replace=False))
        return np.array(sorted(chosen), dtype=np.int64)


# --------------------------------------------------------------------------
# k-means

@dataclass(frozen=True)
class KMeansDownsampler:
    """Lloyd clustering of the regressors with k-means++ seeding.

    Assignment uses the dataset's p-norm; centroids are coordinate means.
    """

    k: int
    extras_per_other_cluster: int = 1
    max_iters: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.extras_per_other_cluster < 0 or self.max_iters < 1:
            raise ValueError("extras must be nonnegative and max_iters positive")

    def prepare(self, data: RegressorDataset) -> "KMeansState":
        if len(data) == 0:
            raise ValueError("cannot downsample an empty dataset")
        if self.k > len(data):
            raise ValueError(f"k={self.k} exceeds the number of pairs ({len(data)})")
        centroids, labels = kmeans(data.S, self.k, data.p, self.max_iters, self.seed)
        members = tuple(np.nonzero(labels == c)[0] for c in range(self.k))
        return KMeansState(self, data, centroids, labels, members)


def _pairwise(points: np.ndarray, centers: np.ndarray, p: float) -> np.ndarray:
    return np.stack([kernels.distances(points, c, p) for c in centers], axis=1)


def kmeans(points: np.ndarray, k: int, p: float = 2.0, max_iters: int = 100, seed: int = 0):
    """``(centroids, labels)`` from k-means++ seeding and Lloyd iterations."""
    X = np.asarray(points, dtype=float)
    rng = np.random.default_rng(seed)
    N = X.shape[0]
    centers = [X[rng.integers(N)]]
    for _ in range(1, k):
        d = _pairwise(X, np.array(centers), p).min(axis=1) ** 2
        total = d.sum()
        if total <= 0:
            # Every point coincides with a center; pick an unused index.
            used = {tuple(c) for c in centers}
            pick = next((i for i in range(N) if tuple(X[i]) not in used), int(rng.integers(N)))
        else:
            pick = int(rng.choice(N, p=d / total))
        centers.append(X[pick])
    C = np.array(centers)
    labels = np.full(N, -1)
    for _ in range(max_iters):
        dist = _pairwise(X, C, p)
        new = np.argmin(dist, axis=1)
        for c in range(k):
            if not np.any(new == c):
                far = int(np.argmax(dist[np.arange(N), new]))
                new[far] = c
                dist[far, :] = np.inf
                dist[far, c] = 0.0
        newC = np.array([X[new == c].mean(axis=0) for c in range(k)])
        if np.array_equal(new, labels):
            break
        labels, C = new, newC
    return C, labels


@dataclass(frozen=True)
class KMeansState:
    config: KMeansDownsampler
    data: RegressorDataset
    centroids: np.ndarray
    labels: np.ndarray
    members: tuple

    def nearest_cluster(self, query) -> int:
        return int(np.argmin(kernels.distances(self.centroids, np.asarray(query, dtype=float), self.data.p)))

    def select(self, query) -> np.ndarray:
        c = self.nearest_cluster(query)
        chosen = set(int(i) for i in self.members[c])
        extra = self.config.extras_per_other_cluster
        if extra:
            rng = np.random.default_rng([self.config.seed, c])
            for other, idx in enumerate(self.members):
                if other == c or idx.size == 0:
                    continue
                take = min(extra, idx.size)
                chosen.update(int(i) for i in rng.choice(idx, size=take, replace=False))
        return np.array(sorted(chosen), dtype=np.int64)


# --------------------------------------------------------------------------
# k nearest neighbors

@dataclass(frozen=True)
class KnnDownsampler:
    """The ``k`` pairs closest to the query; ties go to the lower index."""

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")

    def prepare(self, data: RegressorDataset) -> "KnnState":
        if len(data) == 0:
            raise ValueError("cannot downsample an empty dataset")
        return KnnState(self, data)


@dataclass(frozen=True)
class KnnState:
    config: KnnDownsampler
    data: RegressorDataset

    def select(self, query) -> np.ndarray:
        """Indices ordered by increasing distance."""
        return _nearest(self.data, query, self.config.k)


def prepare(ds, data: RegressorDataset):
    return ds.prepare(data)


def select(state, query) -> np.ndarray:
    return state.select(query)


def from_options(kind: str, param: int | None, seed: int = 0, extras: int | None = None):
    """Downsampler from CLI-style options; ``kind`` is none, grid, kmeans or knn."""
    if kind in (None, "none"):
        return None
    if param is None:
        raise ValueError(f"downsampler {kind!r} needs a size parameter")
    if kind == "grid":
        return GridDownsampler(param, 2 if extras is None else extras, seed)
    if kind == "kmeans":
        return KMeansDownsampler(param, 1 if extras is None else extras, seed=seed)
    if kind == "knn":
        return KnnDownsampler(param)
    raise ValueError(f"unknown downsampler {kind!r}")

