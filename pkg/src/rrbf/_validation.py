"""Input validation helpers used by the estimators and loaders."""

from __future__ import annotations

import numpy as np
from sklearn.exceptions import NotFittedError


def as_float_matrix(X, name="X") -> np.ndarray:
    """Coerce to a 2-D float64 array and reject non-finite entries."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValueError(f"{name} contains NaN or Inf")
    return X


def as_float_vector(x, name="x") -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).ravel()
    if not np.isfinite(x).all():
        raise ValueError(f"{name} contains NaN or Inf")
    return x


def as_label_vector(y, name="y") -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {y.shape}")
    if y.dtype.kind not in "iu":
        yi = y.astype(np.int64)
        if not np.array_equal(yi, y):
            raise ValueError(f"{name} must hold integer class labels")
        y = yi
    return y.astype(np.int64)


def check_same_length(a, b, names=("X", "y")):
    if len(a) != len(b):
        raise ValueError(f"{names[0]} and {names[1]} disagree on length: {len(a)} vs {len(b)}")


def check_n_features(X: np.ndarray, expected: int, name="X"):
    if X.shape[1] != expected:
        raise ValueError(f"{name} has {X.shape[1]} features, expected {expected}")


def check_fitted(estimator, attribute: str):
    if getattr(estimator, attribute, None) is None:
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted yet; call fit() first"
        )
