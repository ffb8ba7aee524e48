"""Hard and smooth dynamic-time-warping kernels and the soft backward pass.

The ground metric is fixed to the squared Euclidean distance.  ``dtw``
returns the minimal cumulative cost over admissible alignments together
with an optimal path; ``soft_dtw`` replaces the min by a soft-min at
temperature ``gamma`` and equals the log-sum-exp of Gibbs path weights;
``soft_dtw_grad`` is the backward pass giving the gradient of the soft
value with respect to every cost-matrix cell.
"""

from __future__ import annotations

import numpy as np

from . import _dp
from .series import as_series


def cost_matrix(x, y) -> np.ndarray:
    """Cross-similarity matrix of squared Euclidean distances.

    entries[i, j] = ||x_i - y_j||^2; requires both series to share their
    feature dimensionality.
    """
    x = as_series(x, "x")
    y = as_series(y, "y")
    if x.shape[1] != y.shape[1]:
        raise ValueError(
            f"dimensionality mismatch: x has p={x.shape[1]}, y has p={y.shape[1]}"
        )
    return _dp.sq_dists(x, y)


def _as_cost(c) -> np.ndarray:
    c = np.ascontiguousarray(np.asarray(c, dtype=np.float64))
    if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
        raise ValueError(f"cost matrix must be nonempty 2d, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValueError("cost matrix contains non-finite values")
    return c


def dtw(c) -> tuple[float, np.ndarray]:
    """Hard DTW on a cost matrix: (minimal cost, optimal path).

    Backtracking ties prefer the diagonal predecessor, then the vertical
    (i-1, j) one, then the horizontal one.
    """
    c = _as_cost(c)
    acc = _dp.dtw_acc(c)
    path = _dp.dtw_backtrack(acc)
    return float(acc[-1, -1]), path


def dtw_value(c) -> float:
    """Hard DTW cost without path backtracking."""
    c = _as_cost(c)
    return float(_dp.dtw_acc(c)[-1, -1])


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not gamma > 0.0:
        raise ValueError(f"gamma must be > 0 (got {gamma}); use dtw() for the hard case")
    return gamma


def soft_dtw(c, gamma: float = 1.0) -> float:
    """Soft DTW value at temperature gamma > 0.

    Equals -gamma * log sum_paths exp(-cost(path)/gamma); converges to
    the hard DTW cost as gamma -> 0 and is always a lower bound on it.
    """
    c = _as_cost(c)
    gamma = _check_gamma(gamma)
    r = _dp.softdtw_acc(c, gamma)
    return float(r[-1, -1])


def soft_dtw_grad(c, gamma: float = 1.0) -> np.ndarray:
    """Gradient of soft_dtw with respect to each cost-matrix entry.

    Entry (i, j) is the soft expected occupancy of cell (i, j); all
    entries lie in [0, 1].
    """
    c = _as_cost(c)
    gamma = _check_gamma(gamma)
    r = _dp.softdtw_acc(c, gamma)
    return _dp.softdtw_grad(c, r, gamma)


def dtw_distance(x, y) -> float:
    """Hard DTW distance between two series (squared-Euclidean ground metric)."""
    x = as_series(x, "x")
    y = as_series(y, "y")
    if x.shape[1] != y.shape[1]:
        raise ValueError(
            f"dimensionality mismatch: x has p={x.shape[1]}, y has p={y.shape[1]}"
        )
    return float(_dp.dtw_value_xy(x, y))


def soft_dtw_distance(x, y, gamma: float = 1.0) -> float:
    """Soft DTW distance between two series."""
    x = as_series(x, "x")
    y = as_series(y, "y")
    if x.shape[1] != y.shape[1]:
        raise ValueError(
            f"dimensionality mismatch: x has p={x.shape[1]}, y has p={y.shape[1]}"
        )
    return float(_dp.softdtw_value_xy(x, y, _check_gamma(gamma)))
