"""Dense tensor construction and validation.

Tensors are C-contiguous (row-major) numpy arrays.  float64 is the default
everywhere; float32 can be requested for speed at the cost of precision.
Checked construction rejects NaN and infinity so numeric faults surface at
the boundary instead of propagating silently.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import DimensionError, NumericError

DEFAULT_DTYPE = np.float64

_DTYPE_NAMES = {
    "float64": np.float64,
    "float32": np.float32,
}


def resolve_dtype(dtype) -> np.dtype:
    """Accept 'float64'/'float32' or a numpy dtype; reject anything else."""
    if dtype is None:
        return np.dtype(DEFAULT_DTYPE)
    if isinstance(dtype, str):
        if dtype not in _DTYPE_NAMES:
            raise DimensionError(f"unsupported dtype {dtype!r}; use 'float64' or 'float32'")
        return np.dtype(_DTYPE_NAMES[dtype])
    dt = np.dtype(dtype)
    if dt not in (np.dtype(np.float64), np.dtype(np.float32)):
        raise DimensionError(f"unsupported dtype {dt}; use float64 or float32")
    return dt


def tensor(data, shape: Sequence[int] | None = None, dtype=None, check: bool = True) -> np.ndarray:
    """Build a row-major tensor from ``data``, optionally reshaped to ``shape``.

    Raises DimensionError when the element count does not match ``shape``
    and NumericError when ``check`` is on and any element is non-finite.
    """
    arr = np.asarray(data, dtype=resolve_dtype(dtype))
    if shape is not None:
        shape = tuple(int(s) for s in shape)
        if any(s < 0 for s in shape):
            raise DimensionError(f"negative extent in shape {shape}")
        expected = math.prod(shape)
        if arr.size != expected:
            raise DimensionError(
                f"shape {shape} needs {expected} elements, data has {arr.size}"
            )
        arr = arr.reshape(shape)
    arr = np.ascontiguousarray(arr)
    if check:
        require_finite(arr, "tensor data")
    return arr


def require_finite(arr: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{what} contains non-finite values")


def flat(arr: np.ndarray) -> np.ndarray:
    """Row-major flat view (copy only if the input is not contiguous)."""
    return np.ascontiguousarray(arr).reshape(-1)
