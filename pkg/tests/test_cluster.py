import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lsc.cluster import (
    LscConfig,
    _kmeanspp_indices,
    _reseed_empty,
    kmeans_fit,
    lsc_fit,
    prepare_lines,
    update_centers,
    within_cluster_ss,
)
from lsc.core import DataError, DataMatrix
from lsc.data import SyntheticSpec, generate_synthetic
from lsc.evaluation import adjusted_rand_index
from lsc.metric import CombinedMetricSpec, combined_cross, estimate_scales

from oracles import median_sorted


def _two_blobs(seed=0, n=20, d=8):
    rng = np.random.default_rng(seed)
    X = np.vstack([-10 + 0.1 * rng.normal(size=(n, d)), 10 + 0.1 * rng.normal(size=(n, d))])
    return DataMatrix(X), np.repeat([0, 1], n)


# ---------------------------------------------------------------- medians


def test_update_centers_examples():
    np.testing.assert_array_equal(update_centers([[[1, 2], [3, 4], [100, 200]]]), [[3, 4]])
    np.testing.assert_array_equal(update_centers([[[1], [3]]]), [[2]])


def test_update_centers_empty_group():
    with pytest.raises(ValueError, match="reseed"):
        update_centers([[[1.0]], []])


@given(st.integers(0, 2**31), st.integers(1, 9))
def test_median_matches_sort_oracle(seed, size):
    G = np.random.default_rng(seed).normal(size=(size, 4))
    c = update_centers([G])[0]
    for j in range(4):
        assert c[j] == median_sorted(G[:, j].tolist())


@given(st.integers(0, 2**31))
def test_median_minimizes_absolute_deviation(seed):
    G = np.random.default_rng(seed).normal(size=(5, 2))
    c = update_centers([G])[0]
    for j in range(2):
        best = np.abs(G[:, j] - c[j]).sum()
        for alt in np.linspace(-3, 3, 61):
            assert np.abs(G[:, j] - alt).sum() >= best - 1e-12


# ------------------------------------------------------------------- config


@pytest.mark.parametrize("bad", [dict(k=0), dict(k=2, max_iter=0), dict(k=2, tol=-1),
                                 dict(k=2, init="furthest"),
                                 dict(k=2, empty_cluster_policy="drop")])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        LscConfig(**bad)


def test_config_round_trip():
    cfg = LscConfig(k=4, seed=9, init="kmeans++", smoothing=False,
                    metric=CombinedMetricSpec(alpha=0.3, dtw_mode="fast",
                                              scale_mode="normalized"))
    assert LscConfig.from_dict(cfg.to_dict()) == cfg


# ---------------------------------------------------------------------- LSC


def test_k_greater_than_n():
    with pytest.raises(DataError):
        lsc_fit(DataMatrix(np.zeros((3, 4))), LscConfig(k=4))


def test_single_cluster_is_median_of_all():
    m = DataMatrix(np.random.default_rng(1).normal(size=(15, 9)))
    cfg = LscConfig(k=1)
    model = lsc_fit(m, cfg)
    X, _, _ = prepare_lines(m, cfg)
    assert np.all(model.labels == 0)
    np.testing.assert_allclose(model.centers[0], np.median(X, axis=0))


@pytest.mark.parametrize("seed", range(5))
def test_separated_blobs_recovered(seed):
    m, truth = _two_blobs(seed)
    model = lsc_fit(m, LscConfig(k=2, seed=seed))
    assert adjusted_rand_index(truth, model.labels) == 1.0


def test_n_equals_k():
    m = DataMatrix(np.random.default_rng(2).normal(size=(4, 6)))
    model = lsc_fit(m, LscConfig(k=4, smoothing=False))
    assert sorted(model.labels.tolist()) == [0, 1, 2, 3]
    assert model.iterations_run <= 2 and model.converged


@pytest.mark.parametrize("init", ["random", "kmeans++"])
@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
def test_labels_are_argmin_after_convergence(init, alpha):
    ds = generate_synthetic(SyntheticSpec(n_samples=60, n_features=12, n_clusters=3,
                                          noise_std=2.0, seed=3))
    cfg = LscConfig(k=3, init=init, metric=CombinedMetricSpec(alpha=alpha), seed=1)
    model = lsc_fit(ds.matrix, cfg)
    assert model.converged
    X, _, _ = prepare_lines(ds.matrix, cfg)
    D = combined_cross(X, model.centers, cfg.metric, estimate_scales(X, cfg.metric))
    np.testing.assert_array_equal(model.labels, np.argmin(D, axis=1))


def test_trace_bookkeeping():
    ds = generate_synthetic(SyntheticSpec(n_samples=80, n_features=10, n_clusters=4,
                                          noise_std=5.0, seed=0))
    model = lsc_fit(ds.matrix, LscConfig(k=4, max_iter=3))
    assert model.iterations_run <= 3
    assert len(model.trace) == model.iterations_run
    assert model.trace[0].label_changes == 80
    assert all(t.center_shift >= 0 for t in model.trace)
    assert {"standardize", "smooth", "distance", "total"} <= model.timings.keys()


def test_deterministic():
    ds = generate_synthetic(SyntheticSpec(n_samples=100, n_features=16, n_clusters=3, seed=4))
    cfg = LscConfig(k=3, seed=11)
    a, b = lsc_fit(ds.matrix, cfg), lsc_fit(ds.matrix, cfg)
    np.testing.assert_array_equal(a.labels, b.labels)
    np.testing.assert_array_equal(a.centers, b.centers)


def test_alpha_zero_differs_from_kmeans_only_in_centers():
    m, truth = _two_blobs(1)
    lsc = lsc_fit(m, LscConfig(k=2, metric=CombinedMetricSpec(alpha=0.0), smoothing=False))
    km = kmeans_fit(m, 2)
    assert adjusted_rand_index(lsc.labels, km.labels) == 1.0


def test_short_lines_shrink_window():
    m = DataMatrix(np.random.default_rng(0).normal(size=(10, 4)))
    model = lsc_fit(m, LscConfig(k=2))
    assert model.info["smoothing"] == {"window_length": 3, "poly_order": 1}
    with pytest.raises(DataError):
        lsc_fit(m, LscConfig(k=2, shrink_window=False))


def test_smoothing_can_be_disabled():
    m = DataMatrix(np.random.default_rng(0).normal(size=(10, 4)))
    assert lsc_fit(m, LscConfig(k=2, smoothing=False)).info["smoothing"] is None


def test_reseed_empty_takes_farthest_line():
    X = np.array([[0.0], [1.0], [9.0], [10.0]])
    labels = np.array([0, 0, 0, 0])
    centers = np.array([[0.0], [50.0]])
    D = np.abs(X - centers.T)
    assert _reseed_empty(X, labels, D, centers, 2) == [1]
    assert labels.tolist() == [0, 0, 0, 1]
    assert centers[1, 0] == 10.0


def test_kmeanspp_picks_distinct_rows():
    X = np.random.default_rng(0).normal(size=(30, 3))

    def dist(A, C):
        return np.sqrt(((A[:, None] - C[None]) ** 2).sum(-1))

    idx = _kmeanspp_indices(X, 5, np.random.default_rng(1), dist)
    assert len(set(idx.tolist())) == 5


# ------------------------------------------------------------------ K-means


def test_kmeans_blobs():
    ds = generate_synthetic(SyntheticSpec(n_samples=200, n_features=8, n_clusters=4,
                                          noise_std=1.0, seed=2))
    model = kmeans_fit(ds.matrix, 4, seed=0)
    assert adjusted_rand_index(ds.truth, model.labels) == 1.0


def test_kmeans_single_cluster_is_mean():
    X = np.random.default_rng(0).normal(size=(12, 3))
    model = kmeans_fit(DataMatrix(X), 1, standardize=False)
    np.testing.assert_allclose(model.centers[0], X.mean(axis=0))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31))
def test_kmeans_inertia_never_increases(seed):
    rng = np.random.default_rng(seed)
    base = rng.normal(size=(15, 2))
    X = np.vstack([base, base])  # duplicate rows
    sse = []
    for it in range(1, 8):
        model = kmeans_fit(DataMatrix(X), 2, seed=seed, max_iter=it, tol=0.0,
                           standardize=False)
        sse.append(within_cluster_ss(X, model.labels, model.centers))
    assert all(b <= a + 1e-9 for a, b in zip(sse, sse[1:]))
