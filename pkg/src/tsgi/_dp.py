"""Dynamic-programming kernels for DTW and softDTW.

All kernels are plain nested loops over float64 arrays so they compile
under numba when it is installed and still run (slower) without it.
Soft-min uses the max-shifted log-sum-exp form; accumulators are double
precision throughout.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


@njit(cache=True)
def sq_dists(x, y):
    """Squared Euclidean cross-distance matrix of two (T, p) series."""
    t_x, p = x.shape
    t_y = y.shape[0]
    c = np.empty((t_x, t_y))
    for i in range(t_x):
        for j in range(t_y):
            acc = 0.0
            for k in range(p):
                d = x[i, k] - y[j, k]
                acc += d * d
            c[i, j] = acc
    return c


@njit(cache=True)
def dtw_acc(c):
    """Accumulated-cost matrix, shape (T_x+1, T_y+1), inf borders, acc[0,0]=0."""
    t_x, t_y = c.shape
    acc = np.full((t_x + 1, t_y + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, t_x + 1):
        for j in range(1, t_y + 1):
            diag = acc[i - 1, j - 1]
            vert = acc[i - 1, j]
            horz = acc[i, j - 1]
            best = diag
            if vert < best:
                best = vert
            if horz < best:
                best = horz
            acc[i, j] = c[i - 1, j - 1] + best
    return acc


@njit(cache=True)
def dtw_backtrack(acc):
    """Optimal path from an accumulated-cost matrix.

    Ties prefer the diagonal predecessor, then the vertical (i-1, j),
    then the horizontal one.  Returns an int64 (L, 2) array.
    """
    t_x = acc.shape[0] - 1
    t_y = acc.shape[1] - 1
    buf = np.empty((t_x + t_y, 2), dtype=np.int64)
    n = 0
    i, j = t_x, t_y
    while i > 0 or j > 0:
        buf[n, 0] = i - 1
        buf[n, 1] = j - 1
        n += 1
        diag = acc[i - 1, j - 1]
        vert = acc[i - 1, j]
        horz = acc[i, j - 1]
        if diag <= vert and diag <= horz:
            i -= 1
            j -= 1
        elif vert <= horz:
            i -= 1
        else:
            j -= 1
    path = np.empty((n, 2), dtype=np.int64)
    for k in range(n):
        path[k, 0] = buf[n - 1 - k, 0]
        path[k, 1] = buf[n - 1 - k, 1]
    return path


@njit(cache=True)
def dtw_value_xy(x, y):
    """Fused cost + DP value for two series; two rolling rows, no path."""
    t_x, p = x.shape
    t_y = y.shape[0]
    prev = np.full(t_y + 1, np.inf)
    cur = np.full(t_y + 1, np.inf)
    prev[0] = 0.0
    for i in range(1, t_x + 1):
        cur[0] = np.inf
        for j in range(1, t_y + 1):
            acc = 0.0
            for k in range(p):
                d = x[i - 1, k] - y[j - 1, k]
                acc += d * d
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = acc + best
        tmp = prev
        prev = cur
        cur = tmp
    return prev[t_y]


@njit(cache=True, inline="always")
def _softmin3(a, b, c, gamma):
    m = a
    if b < m:
        m = b
    if c < m:
        m = c
    s = math.exp(-(a - m) / gamma) + math.exp(-(b - m) / gamma) + math.exp(-(c - m) / gamma)
    return m - gamma * math.log(s)


@njit(cache=True)
def softdtw_acc(c, gamma):
    """Soft accumulated-cost matrix, shape (T_x+1, T_y+1); value at [-1, -1]."""
    t_x, t_y = c.shape
    r = np.full((t_x + 1, t_y + 1), np.inf)
    r[0, 0] = 0.0
    for i in range(1, t_x + 1):
        for j in range(1, t_y + 1):
            r[i, j] = c[i - 1, j - 1] + _softmin3(r[i - 1, j - 1], r[i - 1, j], r[i, j - 1], gamma)
    return r


@njit(cache=True)
def softdtw_value_xy(x, y, gamma):
    """Fused cost + soft DP value; two rolling rows."""
    t_x, p = x.shape
    t_y = y.shape[0]
    prev = np.full(t_y + 1, np.inf)
    cur = np.full(t_y + 1, np.inf)
    prev[0] = 0.0
    for i in range(1, t_x + 1):
        cur[0] = np.inf
        for j in range(1, t_y + 1):
            acc = 0.0
            for k in range(p):
                d = x[i - 1, k] - y[j - 1, k]
                acc += d * d
            cur[j] = acc + _softmin3(prev[j - 1], prev[j], cur[j - 1], gamma)
        tmp = prev
        prev = cur
        cur = tmp
    return prev[t_y]


@njit(cache=True)
def softdtw_grad(c, r, gamma):
    """Backward pass: d(softDTW)/dC, shape (T_x, T_y), entries in [0, 1].

    Entry (i, j) is the soft expected occupancy of cell (i, j) under the
    Gibbs distribution over admissible paths at temperature gamma.
    Exponents are mathematically <= 0; they are clamped at 0 to absorb
    rounding noise.
    """
    t_x, t_y = c.shape
    e = np.zeros((t_x + 2, t_y + 2))
    rr = np.full((t_x + 2, t_y + 2), -np.inf)
    dd = np.zeros((t_x + 2, t_y + 2))
    for i in range(1, t_x + 1):
        for j in range(1, t_y + 1):
            rr[i, j] = r[i, j]
            dd[i, j] = c[i - 1, j - 1]
    rr[t_x + 1, t_y + 1] = r[t_x, t_y]
    e[t_x + 1, t_y + 1] = 1.0
    for j in range(t_y, 0, -1):
        for i in range(t_x, 0, -1):
            w_vert = 0.0
            w_horz = 0.0
            w_diag = 0.0
            if rr[i + 1, j] > -np.inf:
                ex = (rr[i + 1, j] - rr[i, j] - dd[i + 1, j]) / gamma
                if ex > 0.0:
                    ex = 0.0
                w_vert = math.exp(ex)
            if rr[i, j + 1] > -np.inf:
                ex = (rr[i, j + 1] - rr[i, j] - dd[i, j + 1]) / gamma
                if ex > 0.0:
                    ex = 0.0
                w_horz = math.exp(ex)
            if rr[i + 1, j + 1] > -np.inf:
                ex = (rr[i + 1, j + 1] - rr[i, j] - dd[i + 1, j + 1]) / gamma
                if ex > 0.0:
                    ex = 0.0
                w_diag = math.exp(ex)
            e[i, j] = w_vert * e[i + 1, j] + w_horz * e[i, j + 1] + w_diag * e[i + 1, j + 1]
    return e[1:t_x + 1, 1:t_y + 1]
