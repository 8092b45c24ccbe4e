"""Input validation helpers for the estimator API."""
from __future__ import annotations

import numpy as np

from .errors import DimensionError, LabelError
from .tensor import require_finite, resolve_dtype


def check_cube_array(X, k: int | None = None, dtype="float64") -> np.ndarray:
    """Coerce X to a float [n, k, k, k] stack of patch cubes."""
    X = np.asarray(X, dtype=resolve_dtype(dtype))
    if X.ndim != 4:
        raise DimensionError(
            f"expected patch cubes [n_samples, k, k, k], got shape {X.shape}"
        )
    n, a, b, c = X.shape
    if not (a == b == c):
        raise DimensionError(f"patch cubes must have equal edges, got {a}x{b}x{c}")
    if k is not None and a != k:
        raise DimensionError(f"patch edge {a} does not match the fitted edge {k}")
    if n == 0:
        raise DimensionError("need at least one sample")
    require_finite(X, "patch cubes")
    return np.ascontiguousarray(X)


def check_feature_matrix(X, length: int | None = None, dtype="float64") -> np.ndarray:
    """Coerce X to a float [n, length] feature matrix."""
    X = np.asarray(X, dtype=resolve_dtype(dtype))
    if X.ndim != 2:
        raise DimensionError(f"expected a feature matrix [n_samples, length], got {X.shape}")
    if X.shape[0] == 0 or X.shape[1] == 0:
        raise DimensionError(f"feature matrix must be non-empty, got {X.shape}")
    if length is not None and X.shape[1] != length:
        raise DimensionError(
            f"feature length {X.shape[1]} does not match the fitted length {length}"
        )
    require_finite(X, "feature matrix")
    return np.ascontiguousarray(X)


def check_labels(y, n_samples: int) -> np.ndarray:
    """Coerce labels to a non-negative integer vector of matching length."""
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] != n_samples:
        raise DimensionError(
            f"labels must be a vector of length {n_samples}, got shape {y.shape}"
        )
    if not np.issubdtype(y.dtype, np.integer):
        rounded = np.rint(np.asarray(y, dtype=np.float64))
        if not np.array_equal(rounded, np.asarray(y, dtype=np.float64)):
            raise LabelError("labels must be integers")
        y = rounded
    y = y.astype(np.int64)
    if y.min() < 0:
        raise LabelError(f"labels must be non-negative, got minimum {y.min()}")
    return y
