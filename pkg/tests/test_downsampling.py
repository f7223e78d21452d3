import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import pair_dataset
from lipinval.dataset import build_regressor_dataset, make_dataset
from lipinval.downsampling import (GridDownsampler, KMeansDownsampler, KnnDownsampler, from_options, kmeans,
                                   prepare, select)


def planar_dataset(points, lower=-10.0, upper=10.0, p="inf"):
    trajs = [np.vstack([pt, np.zeros(2)]) for pt in points]
    data = make_dataset(trajs, eps_w=[0, 0], eps_v=[0, 0], lower=[lower] * 2, upper=[upper] * 2, p=p)
    return build_regressor_dataset(data)


def test_single_cell_grid():
    reg = pair_dataset([1.0, 2.0, 9.0], [0, 0, 0], lower=0.0, upper=10.0)
    state = prepare(GridDownsampler(1, boundary_extras=0), reg)
    assert list(state.cells) == [(0,)]
    assert list(select(state, [5.0])) == [0, 1, 2]


def test_grid_cell_assignment():
    reg = pair_dataset([1.0, 2.0, 9.0], [0, 0, 0], lower=0.0, upper=10.0)
    state = prepare(GridDownsampler(2, boundary_extras=0), reg)
    assert list(select(state, [1.5])) == [0, 1]
    assert list(select(state, [9.5])) == [2]
    # the shared face belongs to the lower cell
    assert state.cell_of([5.0]) == (0,)
    assert state.cell_of([0.0]) == (0,) and state.cell_of([10.0]) == (1,)


def test_grid_extras_come_from_neighbors():
    reg = pair_dataset([0.5, 1.5, 2.5, 3.5, 9.5], [0] * 5, lower=0.0, upper=10.0)
    state = prepare(GridDownsampler(10, boundary_extras=2, seed=3), reg)
    chosen = set(select(state, [1.2]))
    assert 1 in chosen and chosen <= {0, 1, 2}
    assert len(chosen) == 3
    assert list(select(state, [1.2])) == list(select(state, [1.7]))


def test_grid_empty_cell_falls_back_to_nearest():
    reg = pair_dataset([0.5, 9.5], [0, 0], lower=0.0, upper=10.0)
    state = prepare(GridDownsampler(10, boundary_extras=2), reg)
    assert list(select(state, [6.5])) == [1]


def test_kmeans_one_cluster_per_pair():
    rng = np.random.default_rng(0)
    reg = planar_dataset(rng.normal(size=(6, 2)))
    state = prepare(KMeansDownsampler(6, extras_per_other_cluster=0), reg)
    assert sorted(len(m) for m in state.members) == [1] * 6
    np.testing.assert_allclose(np.sort(state.centroids, axis=0), np.sort(reg.S, axis=0))


@pytest.mark.parametrize("seed", range(5))
def test_kmeans_recovers_blobs(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(scale=0.3, size=(10, 2)) + [-4, -4]
    b = rng.normal(scale=0.3, size=(10, 2)) + [4, 4]
    labels = kmeans(np.vstack([a, b]), 2, p=2.0, seed=seed)[1]
    assert len(set(labels[:10])) == 1 and len(set(labels[10:])) == 1
    assert labels[0] != labels[10]


def test_kmeans_extras_one_per_other_cluster():
    rng = np.random.default_rng(1)
    pts = np.vstack([rng.normal(scale=0.2, size=(5, 2)) + c for c in ([-5, -5], [5, -5], [0, 5])])
    state = prepare(KMeansDownsampler(3, extras_per_other_cluster=1), planar_dataset(pts))
    chosen = select(state, [-5.0, -5.0])
    assert len(chosen) == 5 + 2
    assert set(range(5)) <= set(chosen)


def test_kmeans_rejects_too_many_clusters():
    with pytest.raises(ValueError):
        prepare(KMeansDownsampler(4), pair_dataset([0.0, 1.0, 2.0], [0, 0, 0]))


def test_knn_examples():
    reg = pair_dataset([0.0, 10.0], [0.0, 0.0])
    assert list(select(prepare(KnnDownsampler(1), reg), [1.0])) == [0]
    assert sorted(select(prepare(KnnDownsampler(2), reg), [1.0])) == [0, 1]
    # equidistant: lower index wins
    assert list(select(prepare(KnnDownsampler(1), reg), [5.0])) == [0]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 12), st.sampled_from(["1", "2", "inf"]))
def test_knn_properties(seed, k, p):
    rng = np.random.default_rng(seed)
    reg = planar_dataset(rng.integers(-3, 4, size=(10, 2)).astype(float), p=p)
    q = rng.integers(-3, 4, size=2).astype(float)
    chosen = select(prepare(KnnDownsampler(k), reg), q)
    dist = np.linalg.norm(reg.S - q, ord=reg.p, axis=1)
    assert len(chosen) == min(k, 10) and len(set(chosen)) == len(chosen)
    assert np.all(np.diff(dist[chosen]) >= 0)
    rest = np.setdiff1d(np.arange(10), chosen)
    if rest.size:
        assert dist[chosen].max() <= dist[rest].min()
    bigger = select(prepare(KnnDownsampler(k + 1), reg), q)
    assert set(chosen) <= set(bigger)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["grid", "kmeans", "knn"]), st.integers(1, 4))
def test_selection_is_nonempty_subset_and_deterministic(seed, kind, param):
    rng = np.random.default_rng(seed)
    reg = planar_dataset(rng.uniform(-10, 10, size=(8, 2)))
    ds = from_options(kind, param, seed=seed % 100)
    q = rng.uniform(-12, 12, size=2)
    first = select(prepare(ds, reg), q)
    assert first.size > 0 and set(first) <= set(range(8))
    np.testing.assert_array_equal(first, select(prepare(ds, reg), q))


def test_from_options():
    assert from_options("none", None) is None
    assert isinstance(from_options("knn", 3), KnnDownsampler)
    assert from_options("grid", 2, extras=0).boundary_extras == 0
    with pytest.raises(ValueError):
        from_options("grid", None)
    with pytest.raises(ValueError):
        from_options("voronoi", 3)
