"""Query-by-example retrieval over a corpus of feature series.

For each query the corpus is ranked by distance; the true match of a
query is the corpus entry with the same name (for directory runs, the
same file basename).  Reported metrics: rank of the true match per
query, recall@k for k = 1..10, and the mean rank of the first correct
match (MR1).

Methods:

* ``dtw``             plain DTW on raw features
* ``dtw+oti``         one global transposition from average energy per
                      feature band, applied before DTW
* ``dtw-gi-stiefel``  joint alignment with an orthonormal feature map
* ``dtw-gi-oti``      joint alignment re-estimating the optimal
                      transposition along the alignment path each round
"""

from __future__ import annotations

import numpy as np

from .align import cost_matrix, dtw_value
from .gi import SolverConfig, dtw_gi_bcd
from .series import as_series

METHODS = ("dtw", "dtw+oti", "dtw-gi-stiefel", "dtw-gi-oti")


def oti_index(x: np.ndarray, y: np.ndarray) -> int:
    """Transposition of y best matching x, from time-averaged band energy."""
    x = as_series(x, "x")
    y = as_series(y, "y")
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"dimensionality mismatch: {x.shape[1]} vs {y.shape[1]}")
    gx = x.mean(axis=0)
    gy = y.mean(axis=0)
    scores = [float(gx @ np.roll(gy, k)) for k in range(x.shape[1])]
    return int(np.argmax(scores))


def retrieval_distance(x, y, method: str, cfg: SolverConfig | None = None) -> float:
    """Distance between a query x and a corpus item y under one method."""
    cfg = cfg or SolverConfig()
    x = as_series(x, "x")
    y = as_series(y, "y")
    if method == "dtw":
        return dtw_value(cost_matrix(x, y))
    if method == "dtw+oti":
        shifted = np.roll(y, oti_index(x, y), axis=1)
        return dtw_value(cost_matrix(x, shifted))
    if method == "dtw-gi-stiefel":
        return dtw_gi_bcd(x, y, "stiefel", cfg).cost
    if method == "dtw-gi-oti":
        return dtw_gi_bcd(x, y, "transposition", cfg).cost
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def run_retrieval(
    queries: list[tuple[str, np.ndarray]],
    corpus: list[tuple[str, np.ndarray]],
    method: str,
    cfg: SolverConfig | None = None,
) -> dict:
    """Rank the corpus for every query and aggregate retrieval metrics.

    Returns a dict with per-query ``ranks`` (parallel to ``queries``),
    ``recall`` mapping k to recall@k, and ``mr1``.  Queries without a
    same-named corpus entry are rejected.
    """
    if not queries or not corpus:
        raise ValueError("need at least one query and one corpus item")
    corpus_names = [name for name, _ in corpus]
    ranks = []
    for qname, qarr in queries:
        if qname not in corpus_names:
            raise ValueError(f"query {qname!r} has no same-named corpus entry")
        dists = np.array([retrieval_distance(qarr, carr, method, cfg) for _, carr in corpus])
        order = np.argsort(dists, kind="stable")
        rank = int(np.where(np.asarray(corpus_names)[order] == qname)[0][0]) + 1
        ranks.append(rank)
    ranks_arr = np.asarray(ranks)
    ks = range(1, min(10, len(corpus)) + 1)
    recall = {k: float((ranks_arr <= k).mean()) for k in ks}
    return {
        "ranks": ranks,
        "recall": recall,
        "mr1": float(ranks_arr.mean()),
    }
