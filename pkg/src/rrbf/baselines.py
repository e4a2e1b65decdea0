"""Linear dimension reducers (PCA, LDA) and k-nearest-neighbor classification.

Both reducers produce a LinearProjector: a mean plus a d x m basis whose
columns are projection directions. PCA directions are the leading
eigenvectors of the sample covariance (label-blind). LDA directions maximize
between-class scatter against within-class scatter; they are computed by
Cholesky-whitening the within-class scatter so only a symmetric
eigendecomposition is ever needed, and at most K-1 directions exist.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin

from ._validation import (
    as_float_matrix,
    as_label_vector,
    check_fitted,
    check_n_features,
    check_same_length,
)
from .dataset import LabeledDataset
from .projection import Projection2D

__all__ = [
    "LinearProjector",
    "pca_fit",
    "lda_fit",
    "transform",
    "knn_classify",
    "knn_predict",
    "PCAReducer",
    "LDAReducer",
    "KNNClassifier",
]


@dataclass(frozen=True)
class LinearProjector:
    """Affine projection x -> basis' (x - mean); kind is "pca" or "lda"."""

    mean: np.ndarray
    basis: np.ndarray  # d x m, columns are directions
    kind: str
    values: np.ndarray  # decreasing: variances (pca) or scatter ratios (lda)
    degenerate: bool = False

    def __post_init__(self):
        if self.kind not in ("pca", "lda"):
            raise ValueError(f"kind must be pca or lda, got {self.kind!r}")
        if self.basis.ndim != 2 or self.basis.shape[0] != len(self.mean):
            raise ValueError("basis must be d x m with d matching mean")

    @property
    def n_features(self) -> int:
        return self.basis.shape[0]

    @property
    def n_components(self) -> int:
        return self.basis.shape[1]


def _canonical_signs(basis: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive (stable
    orientation; eigensolvers are free to return either sign)."""
    flip = np.sign(basis[np.abs(basis).argmax(axis=0), np.arange(basis.shape[1])])
    flip[flip == 0] = 1.0
    return basis * flip


def pca_fit(dataset: LabeledDataset | np.ndarray, m: int) -> LinearProjector:
    """Top-m principal directions of the sample covariance, eigenvalues in
    descending order. Labels play no role."""
    X = dataset.X if isinstance(dataset, LabeledDataset) else as_float_matrix(dataset)
    n, d = X.shape
    if not (1 <= m <= d):
        raise ValueError(f"m must be in [1, {d}], got {m}")
    if n < 2:
        raise ValueError(f"need at least 2 samples to fit PCA, got {n}")
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (n - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals, kind="stable")[::-1][:m]
    values = evals[order]
    basis = _canonical_signs(evecs[:, order])
    # rank-deficient covariance: eigh still yields an orthonormal completion,
    # but flag that trailing directions carry no variance
    tol = max(evals.max(), 0.0) * 1e-12
    degenerate = bool((values <= tol).any())
    return LinearProjector(mean=mean, basis=basis, kind="pca", values=values, degenerate=degenerate)


def lda_fit(dataset: LabeledDataset, m: int) -> LinearProjector:
    """Top-m discriminant directions.

    Solves the within/between scatter problem by whitening: with S_w = L L',
    the eigenvectors u of L^-1 S_b L^-T give directions a = L^-T u, normalized
    so a' S_w a = 1. S_w gets a ridge of 1e-6 tr(S_w)/d when singular.
    """
    X, y = dataset.X, dataset.y
    n, d = X.shape
    classes = np.arange(dataset.n_classes)
    max_m = dataset.n_classes - 1
    if not (1 <= m <= min(d, max_m)):
        raise ValueError(
            f"m must be in [1, {min(d, max_m)}] for {dataset.n_classes} classes "
            f"in {d} features, got {m}"
        )
    counts = dataset.class_counts()
    if (counts < 2).any():
        tiny = int(np.flatnonzero(counts < 2)[0])
        raise ValueError(f"class {tiny} has fewer than 2 samples; cannot estimate scatter")

    mean = X.mean(axis=0)
    s_w = np.zeros((d, d))
    s_b = np.zeros((d, d))
    for c in classes:
        Xc = X[y == c]
        mu_c = Xc.mean(axis=0)
        centered = Xc - mu_c
        s_w += centered.T @ centered
        gap = mu_c - mean
        s_b += len(Xc) * np.outer(gap, gap)

    try:
        chol = np.linalg.cholesky(s_w)
    except np.linalg.LinAlgError:
        s_w = s_w + (1e-6 * np.trace(s_w) / d) * np.eye(d)
        chol = np.linalg.cholesky(s_w)
    white = np.linalg.solve(chol, s_b)
    white = np.linalg.solve(chol, white.T).T  # L^-1 S_b L^-T
    white = (white + white.T) / 2
    evals, evecs = np.linalg.eigh(white)
    order = np.argsort(evals, kind="stable")[::-1][:m]
    basis = _canonical_signs(np.linalg.solve(chol.T, evecs[:, order]))
    return LinearProjector(
        mean=mean, basis=basis, kind="lda", values=evals[order], degenerate=False
    )


def transform(projector: LinearProjector, samples):
    """Project a dataset or matrix; 2-component projections of a dataset come
    back as a Projection2D, everything else as a plain array."""
    if isinstance(samples, LabeledDataset):
        reduced = transform(projector, samples.X)
        if projector.n_components == 2:
            return Projection2D(points=reduced, labels=samples.y, source=projector.kind)
        return reduced
    X = as_float_matrix(samples)
    check_n_features(X, projector.n_features)
    return (X - projector.mean) @ projector.basis


def knn_classify(train_X, train_y, query, k: int) -> int:
    """Majority label among the k nearest training points of one query.

    Ties are deterministic: equal distances keep the lower training index,
    equal votes keep the smallest class index.
    """
    train_X = as_float_matrix(train_X, "train_X")
    train_y = as_label_vector(train_y, "train_y")
    check_same_length(train_X, train_y, ("train_X", "train_y"))
    if len(train_X) == 0:
        raise ValueError("training set is empty")
    if not (1 <= k <= len(train_X)):
        raise ValueError(f"k must be in [1, {len(train_X)}], got {k}")
    query = np.asarray(query, dtype=np.float64).ravel()
    check_n_features(train_X, len(query), "train_X")

    diff = train_X - query
    d2 = (diff**2).sum(axis=1)
    nearest = np.argsort(d2, kind="stable")[:k]  # stable: index order breaks ties
    votes = np.bincount(train_y[nearest])
    return int(np.argmax(votes))  # argmax takes the first (smallest) class on ties


def knn_predict(train_X, train_y, queries, k: int) -> np.ndarray:
    """knn_classify over the rows of queries."""
    queries = as_float_matrix(queries, "queries")
    return np.array([knn_classify(train_X, train_y, q, k) for q in queries], dtype=np.int64)


class PCAReducer(TransformerMixin, BaseEstimator):
    """Estimator facade over pca_fit/transform."""

    def __init__(self, n_components=2):
        self.n_components = n_components
        self.projector_ = None

    def fit(self, X, y=None):
        self.projector_ = pca_fit(as_float_matrix(X), int(self.n_components))
        self.n_features_in_ = self.projector_.n_features
        return self

    def transform(self, X):
        check_fitted(self, "projector_")
        return transform(self.projector_, as_float_matrix(X))


class LDAReducer(TransformerMixin, BaseEstimator):
    """Estimator facade over lda_fit/transform.

    n_components=None resolves to min(2, K-1) at fit time; an explicit value
    above K-1 is rejected.
    """

    def __init__(self, n_components=None):
        self.n_components = n_components
        self.projector_ = None

    def fit(self, X, y):
        X = as_float_matrix(X)
        y = as_label_vector(y)
        self.classes_, y_enc = np.unique(y, return_inverse=True)
        m = self.n_components
        if m is None:
            m = min(2, len(self.classes_) - 1)
        ds = LabeledDataset(X, y_enc, name="lda-train")
        self.projector_ = lda_fit(ds, int(m))
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_fitted(self, "projector_")
        return transform(self.projector_, as_float_matrix(X))


class KNNClassifier(ClassifierMixin, BaseEstimator):
    """Plain Euclidean k-nearest-neighbor voting with deterministic ties."""

    def __init__(self, k=3):
        self.k = k
        self.train_X_ = None

    def fit(self, X, y):
        X = as_float_matrix(X)
        y = as_label_vector(y)
        check_same_length(X, y)
        self.classes_, y_enc = np.unique(y, return_inverse=True)
        self.train_X_ = X
        self.train_y_ = y_enc
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_fitted(self, "train_X_")
        preds = knn_predict(self.train_X_, self.train_y_, X, int(self.k))
        return self.classes_[preds]
