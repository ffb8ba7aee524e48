"""Shared helpers for T x p time-series arrays and alignment paths.

A time series is a plain ndarray of shape (T, p): T observations of p
real-valued features.  An alignment path is an int64 ndarray of shape
(L, 2) listing matched (i, j) index pairs, 0-based, starting at (0, 0)
and ending at (T_x - 1, T_y - 1) with steps in {(0,1), (1,0), (1,1)}.
"""

from __future__ import annotations

import numpy as np


def as_series(x, name: str = "series") -> np.ndarray:
    """Validate and convert input to a float64 (T, p) array.

    Raises ValueError on empty, non-2d or non-finite input.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2d (T, p), got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have T >= 1 and p >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_path(path: np.ndarray, t_x: int, t_y: int) -> None:
    """Raise if `path` is not an admissible alignment for lengths (t_x, t_y)."""
    p = np.asarray(path)
    if p.ndim != 2 or p.shape[1] != 2 or p.shape[0] < 1:
        raise ValueError(f"path must have shape (L, 2), got {p.shape}")
    if tuple(p[0]) != (0, 0) or tuple(p[-1]) != (t_x - 1, t_y - 1):
        raise ValueError("path must start at (0, 0) and end at (T_x-1, T_y-1)")
    steps = np.diff(p, axis=0)
    ok = ((steps[:, 0] >= 0) & (steps[:, 1] >= 0)
          & (steps[:, 0] <= 1) & (steps[:, 1] <= 1)
          & ((steps[:, 0] + steps[:, 1]) >= 1))
    if not np.all(ok):
        raise ValueError("path steps must be (0,1), (1,0) or (1,1)")


def path_matrix(path: np.ndarray, t_x: int, t_y: int) -> np.ndarray:
    """Binary (T_x, T_y) matrix with ones on the path cells."""
    w = np.zeros((t_x, t_y))
    w[path[:, 0], path[:, 1]] = 1.0
    return w


def path_cost(cost: np.ndarray, path: np.ndarray) -> float:
    """Sum of cost-matrix entries along an alignment path."""
    return float(cost[path[:, 0], path[:, 1]].sum())


def resample_linear(x: np.ndarray, length: int) -> np.ndarray:
    """Resample a (T, p) series to `length` timestamps by linear interpolation."""
    x = as_series(x)
    if length == x.shape[0]:
        return x.copy()
    told = np.linspace(0.0, 1.0, x.shape[0])
    tnew = np.linspace(0.0, 1.0, length)
    return np.column_stack([np.interp(tnew, told, x[:, d]) for d in range(x.shape[1])])
