"""Bag-of-words encoding of per-frame anatomical features.

A codebook of M centroids is learned with Lloyd's k-means on (standardized)
training frames; each trial is then summarized by the fraction of its frames
assigned to each centroid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .errors import EmptyStream, TooFewDistinctPoints, TooFewPoints
from .features import GaitFeatures
from .standardize import Scaler, standardize_apply, standardize_fit


@dataclass(frozen=True, eq=False)
class Codebook:
    centroids: np.ndarray
    seed: int
    inertia: float
    scaler: Scaler | None = None
    history: tuple = field(default=(), repr=False)  # inertia after each assignment step
    n_iter: int = 0

    @property
    def M(self) -> int:
        return len(self.centroids)

    def to_json(self) -> str:
        scaler = self.scaler or Scaler.identity(self.centroids.shape[1])
        return json.dumps({
            "M": self.M,
            "seed": self.seed,
            "centroids": self.centroids.tolist(),
            "scaler": scaler.to_dict(),
            "inertia": self.inertia,
        })

    @classmethod
    def from_json(cls, text: str) -> "Codebook":
        d = json.loads(text)
        centroids = np.asarray(d["centroids"], dtype=np.float64)
        if centroids.shape[0] != d["M"]:
            raise ValueError("codebook M does not match centroid count")
        return cls(centroids, d["seed"], d.get("inertia", float("nan")), Scaler.from_dict(d["scaler"]))

    def transform(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if self.scaler is not None:
            pts = standardize_apply(self.scaler, pts)
        return np.ascontiguousarray(pts)


def _initial_centroids(X: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    chosen, seen = [], set()
    for idx in rng.permutation(len(X)):
        row = X[idx].tobytes()
        if row not in seen:
            seen.add(row)
            chosen.append(idx)
            if len(chosen) == K:
                return X[chosen].copy()
    raise TooFewDistinctPoints(f"need {K} distinct points, found {len(chosen)}")


def kmeans_fit(points, K: int, seed: int = 0, max_iter: int = 100, tol: float = 1e-6) -> Codebook:
    """Lloyd's algorithm from K distinct points drawn at random.

    Stops when no centroid moves by ``tol`` or more, or after ``max_iter``
    update steps.  A centroid that loses all its points is moved onto the
    point currently farthest from its own centroid.
    """
    X = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=np.float64)))
    n, dim = X.shape
    if K < 1:
        raise ValueError("K must be >= 1")
    if n < K:
        raise TooFewPoints(f"{n} points for K={K}")
    rng = np.random.default_rng(seed)
    C = _initial_centroids(X, K, rng)
    history = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        labels, d2 = _kernels.nearest_centroid(X, C)
        history.append(float(d2.sum()))
        counts = np.bincount(labels, minlength=K)
        # mean as offset from a member point: a cluster of identical points
        # gets exactly that point (sum/count would round)
        ref = np.zeros_like(C)
        ref[labels[::-1]] = X[::-1]
        D = X - ref[labels]
        sums = np.column_stack([np.bincount(labels, weights=D[:, j], minlength=K) for j in range(dim)])
        new = C.copy()
        full = counts > 0
        new[full] = ref[full] + sums[full] / counts[full, None]
        empty = np.flatnonzero(~full)
        if len(empty):
            far = np.argsort(-d2, kind="stable")
            for k, idx in zip(empty, far):
                new[k] = X[idx]
        shift = float(np.max(np.linalg.norm(new - C, axis=1)))
        C = new
        if shift < tol:
            break
    labels, d2 = _kernels.nearest_centroid(X, C)
    inertia = float(d2.sum())
    history.append(inertia)
    return Codebook(C, seed, inertia, None, tuple(history), n_iter)


def fit_codebook(frames, K: int, seed: int = 0, max_iter: int = 100, tol: float = 1e-6) -> Codebook:
    """Standardize the frames, then cluster them.  The scaler travels with
    the codebook so new streams are encoded in the same space."""
    X = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    scaler = standardize_fit(X)
    cb = kmeans_fit(standardize_apply(scaler, X), K, seed, max_iter, tol)
    return replace(cb, scaler=scaler)


def assign_many(codebook: Codebook, points) -> np.ndarray:
    labels, _ = _kernels.nearest_centroid(codebook.transform(points), np.ascontiguousarray(codebook.centroids))
    return labels


def assign(codebook: Codebook, point) -> int:
    return int(assign_many(codebook, [point])[0])


@dataclass(frozen=True, eq=False)
class BowHistogram:
    weights: np.ndarray

    @property
    def M(self) -> int:
        return len(self.weights)


def bow_histogram(codebook: Codebook, stream) -> BowHistogram:
    pts = np.asarray(stream, dtype=np.float64)
    if pts.size == 0:
        raise EmptyStream("cannot encode an empty feature stream")
    labels = assign_many(codebook, pts)
    return BowHistogram(np.bincount(labels, minlength=codebook.M) / len(labels))


@dataclass(frozen=True, eq=False)
class FeatureVector:
    gait: GaitFeatures
    bow: BowHistogram

    @property
    def values(self) -> np.ndarray:
        return np.concatenate([self.gait.as_array(), self.bow.weights])

    def __len__(self) -> int:
        return 3 + self.bow.M


def build_feature_vector(gait: GaitFeatures, hist: BowHistogram) -> FeatureVector:
    return FeatureVector(gait, hist)
