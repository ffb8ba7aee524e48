"""Structured forecasting by attention over transformed training futures.

A query's future is predicted as a softmax-weighted sum of the training
series' futures, each mapped into the query's feature frame by the
similarity backend's transform:

    prediction = sum_i softmax_i(-lambda * d_i) * f_i(ends_i)

Backends pair a distance with a transform: plain L2 and soft-DTW use the
identity map; the Procrustes backends register features through a
one-to-one-in-time affine fit; the joint backend optimizes transform and
alignment together and is the only one invariant to rotation and warp
simultaneously.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .align import cost_matrix, soft_dtw
from .gi import SolverConfig, soft_dtw_gi_grad
from .series import as_series
from .transforms import AffineStiefel, affine_procrustes_solve

BACKENDS = ("l2", "l2+procrustes", "softdtw", "softdtw+procrustes", "softdtw-gi")


@dataclass
class ForecastCorpus:
    """Full training series plus the begin/end split index."""

    series: np.ndarray
    split: int

    def __post_init__(self):
        arr = np.asarray(self.series, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[0] < 1:
            raise ValueError(f"series must have shape (n, T, p), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("series contain non-finite values")
        if not 1 <= self.split < arr.shape[1]:
            raise ValueError(
                f"split must satisfy 1 <= split < T={arr.shape[1]}, got {self.split}"
            )
        self.series = arr

    @property
    def begins(self) -> np.ndarray:
        return self.series[:, : self.split]

    @property
    def ends(self) -> np.ndarray:
        return self.series[:, self.split:]


def attention_weights(distances, lam: float) -> np.ndarray:
    """softmax(-lam * d): a probability vector favoring small distances.

    Computed with the max-shift trick; as lam grows the weights converge
    to an indicator of the minimal distance (nearest-neighbor limit).
    """
    d = np.asarray(distances, dtype=np.float64).reshape(-1)
    if d.size == 0:
        raise ValueError("need at least one distance")
    if not np.all(np.isfinite(d)):
        raise ValueError("distances must be finite")
    if not lam > 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    logits = -lam * d
    logits -= logits.max()
    w = np.exp(logits)
    return w / w.sum()


def procrustes_distance(y: np.ndarray, x: np.ndarray) -> tuple[float, AffineStiefel]:
    """Minimal squared error of an affine-orthonormal fit of x onto y.

    Assumes a one-to-one time correspondence (equal lengths); this
    baseline registers features but cannot warp time.
    """
    y = as_series(y, "y")
    x = as_series(x, "x")
    if y.shape != x.shape:
        raise ValueError(
            f"one-to-one registration needs equal shapes, got {y.shape} vs {x.shape}"
        )
    t = y.shape[0]
    diag = np.column_stack([np.arange(t), np.arange(t)])
    f = affine_procrustes_solve(y, x, diag)
    resid = f.apply(x) - y
    return float((resid * resid).sum()), f


def backend_distance(y_begin: np.ndarray, x_begin: np.ndarray, backend: str,
                     gamma: float = 1.0, cfg: SolverConfig | None = None):
    """(distance, transform) for one training series; None means identity."""
    if backend == "l2":
        diff = y_begin - x_begin
        return float((diff * diff).sum()), None
    if backend == "l2+procrustes":
        return procrustes_distance(y_begin, x_begin)
    if backend == "softdtw":
        return soft_dtw(cost_matrix(y_begin, x_begin), gamma), None
    if backend == "softdtw+procrustes":
        _, f = procrustes_distance(y_begin, x_begin)
        return soft_dtw(cost_matrix(y_begin, f.apply(x_begin)), gamma), f
    if backend == "softdtw-gi":
        solver_cfg = cfg or SolverConfig(max_iter=500, gamma=gamma)
        res = soft_dtw_gi_grad(y_begin, x_begin, "affine_stiefel", solver_cfg)
        return res.cost, res.transform
    raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")


def forecast(
    y_begin,
    corpus: ForecastCorpus,
    backend: str = "softdtw-gi",
    lam: float = 1e-2,
    gamma: float = 1.0,
    cfg: SolverConfig | None = None,
) -> np.ndarray:
    """Predict the future of a partial series from the corpus.

    Output has shape (T - split, p).  For backends without feature
    registration the transform is the identity; transforms always map
    training-series features onto the query's.
    """
    y_begin = as_series(y_begin, "y_begin")
    if y_begin.shape[0] != corpus.split:
        raise ValueError(
            f"query length {y_begin.shape[0]} must equal the corpus split {corpus.split}"
        )
    if y_begin.shape[1] != corpus.series.shape[2]:
        raise ValueError(
            f"query has p={y_begin.shape[1]}, corpus has p={corpus.series.shape[2]}"
        )
    dists, maps = distances_and_maps(y_begin, corpus, backend, gamma, cfg)
    return combine_futures(corpus, dists, maps, lam)


def distances_and_maps(y_begin, corpus: ForecastCorpus, backend: str,
                       gamma: float = 1.0, cfg: SolverConfig | None = None):
    """Per-training-series (distance, transform) lists for one query."""
    dists, maps = [], []
    for x_begin in corpus.begins:
        d, f = backend_distance(y_begin, x_begin, backend, gamma, cfg)
        dists.append(d)
        maps.append(f)
    return np.asarray(dists), maps


def combine_futures(corpus: ForecastCorpus, dists, maps, lam: float) -> np.ndarray:
    """Attention-weighted sum of transformed training futures."""
    w = attention_weights(dists, lam)
    out = np.zeros_like(corpus.ends[0])
    for wi, f, end in zip(w, maps, corpus.ends):
        out += wi * (end if f is None else f.apply(end))
    return out
