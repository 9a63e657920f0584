import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gugt import _kernels
from gugt.encoding import (
    Codebook, assign, assign_many, bow_histogram, build_feature_vector, fit_codebook, kmeans_fit,
)
from gugt.errors import DimensionMismatch, EmptyStream, EmptyTrainingSet, TooFewDistinctPoints, TooFewPoints
from gugt.features import GaitFeatures
from gugt.standardize import standardize_apply, standardize_fit
from oracles import kmeans_brute_optimum, nearest_centroid_oracle


def test_k1_is_mean():
    X = np.random.default_rng(0).normal(size=(50, 3))
    cb = kmeans_fit(X, 1)
    assert np.allclose(cb.centroids[0], X.mean(0))
    assert cb.inertia == pytest.approx(X.var(0).sum() * 50)


def test_two_blobs():
    rng = np.random.default_rng(1)
    a = rng.uniform(0, 1, (30, 2))
    b = rng.uniform(10, 11, (30, 2))
    cb = kmeans_fit(np.vstack([a, b]), 2, seed=3)
    boxes = [(a.min(0), a.max(0)), (b.min(0), b.max(0))]
    for c in cb.centroids:
        assert sum(np.all((lo <= c) & (c <= hi)) for lo, hi in boxes) == 1


def test_ten_centroids():
    X = np.random.default_rng(2).normal(size=(200, 4))
    assert fit_codebook(X, 10, seed=0).M == 10


def test_too_few():
    with pytest.raises(TooFewPoints):
        kmeans_fit(np.zeros((3, 2)), 4)
    with pytest.raises(TooFewDistinctPoints):
        kmeans_fit(np.zeros((6, 2)), 2)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(5, 60), k=st.integers(1, 5), d=st.integers(1, 4))
def test_inertia_non_increasing(seed, n, k, d):
    X = np.random.default_rng(seed).normal(size=(n, d))
    h = np.array(kmeans_fit(X, k, seed=seed).history)
    assert np.all(np.diff(h) <= 1e-9 * max(1.0, h[0]))


def test_inertia_zero_with_k_equal_distinct():
    X = np.repeat(np.random.default_rng(0).normal(size=(6, 2)), 3, axis=0)
    assert kmeans_fit(X, 6, seed=1).inertia == 0.0


def test_deterministic_seed():
    X = np.random.default_rng(4).normal(size=(80, 3))
    a, b = kmeans_fit(X, 5, seed=9), kmeans_fit(X, 5, seed=9)
    assert np.array_equal(a.centroids, b.centroids)


def test_local_optimum_not_worse_than_far_from_brute_force():
    X = np.array([[0.0], [0.1], [0.2], [5.0], [5.1], [9.0]])
    best = kmeans_brute_optimum(X, 3)
    assert min(kmeans_fit(X, 3, seed=s).inertia for s in range(10)) == pytest.approx(best)


def test_empty_cluster_reseeded():
    X = np.array([[0.0, 0], [0, 1], [1, 0], [1, 1], [50, 50]])
    cb = kmeans_fit(X, 4, seed=0)
    labels = assign_many(cb, X)
    assert len(set(labels.tolist())) == 4


def test_assign_examples():
    C = np.arange(10, dtype=float).reshape(5, 2)
    cb = Codebook(C, 0, 0.0)
    assert assign(cb, C[3]) == 3
    cb2 = Codebook(np.array([[-1.0, 0], [1.0, 0]]), 0, 0.0)
    assert assign(cb2, [0.0, 0.0]) == 0


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_assign_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    X = np.round(rng.normal(size=(30, 3)), 1)
    C = np.round(rng.normal(size=(6, 3)), 1)
    labels, d2 = _kernels.nearest_centroid(X, C)
    ol, od = nearest_centroid_oracle(X.tolist(), C.tolist())
    assert labels.tolist() == ol
    np.testing.assert_allclose(d2, od, rtol=1e-12)


def test_histogram_of_copies():
    cb = Codebook(np.eye(4), 0, 0.0)
    h = bow_histogram(cb, np.tile(np.eye(4)[2], (7, 1)))
    assert h.weights.tolist() == [0, 0, 1.0, 0]
    with pytest.raises(EmptyStream):
        bow_histogram(cb, np.empty((0, 4)))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 50))
def test_histogram_sums_to_one(seed, n):
    rng = np.random.default_rng(seed)
    cb = Codebook(rng.normal(size=(5, 4)), 0, 0.0)
    h = bow_histogram(cb, rng.normal(size=(n, 4)))
    assert h.weights.sum() == pytest.approx(1.0)
    assert np.all(h.weights >= 0)


@pytest.mark.parametrize("M", [10, 4])
def test_feature_vector_length(M):
    cb = Codebook(np.eye(M), 0, 0.0)
    fv = build_feature_vector(GaitFeatures(8, 0.6, 1.5), bow_histogram(cb, np.eye(M)))
    assert len(fv) == len(fv.values) == M + 3


def test_codebook_json_round_trip():
    X = np.random.default_rng(7).normal(size=(100, 4)) * [1, 10, 0.1, 3]
    cb = fit_codebook(X, 6, seed=2)
    back = Codebook.from_json(cb.to_json())
    assert np.array_equal(back.centroids, cb.centroids)
    assert back.scaler == cb.scaler
    assert np.array_equal(bow_histogram(back, X).weights, bow_histogram(cb, X).weights)


def test_standardize_examples():
    X = np.tile([1.0, 2.0, 3.0], (5, 1))
    assert np.array_equal(standardize_apply(standardize_fit(X), X), np.zeros((5, 3)))
    Z = np.random.default_rng(0).normal(size=(500, 3))
    Z = (Z - Z.mean(0)) / Z.std(0)
    sc = standardize_fit(Z)
    assert np.allclose(sc.mean, 0) and np.allclose(sc.std, 1)
    R = np.random.default_rng(1).uniform(-5, 50, (40, 6))
    assert np.all(np.abs(standardize_apply(standardize_fit(R), R).mean(0)) < 1e-10)
    with pytest.raises(EmptyTrainingSet):
        standardize_fit(np.empty((0, 3)))
    with pytest.raises(DimensionMismatch):
        standardize_apply(sc, np.zeros(4))
