"""Experiment runners emitting plot-ready CSV rows.

Each study is deterministic given its seed and returns rows in a fixed
order (sorted by the declared key columns), so reruns produce identical
artifacts byte for byte.  Timing uses a discarded warm-up run per grid
point followed by the requested number of timed trials.
"""

from __future__ import annotations

import time
import zlib

import numpy as np

from .align import dtw_distance, soft_dtw_distance
from .forecast import BACKENDS, ForecastCorpus, combine_futures, distances_and_maps
from .gi import SolverConfig, dtw_gi_bcd, soft_dtw_gi_grad
from .synth import GeneratorSpec, generate, generate_pairs_for_rotation_study, make_forecast_corpus

TIMING_METHODS = ("dtw", "softdtw", "dtw-gi", "softdtw-gi")
ROTATION_METHODS = ("dtw", "softdtw", "dtw-gi", "softdtw-gi")


def _timed_call(method: str, x: np.ndarray, y: np.ndarray, cfg: SolverConfig) -> float:
    t0 = time.perf_counter()
    if method == "dtw":
        dtw_distance(x, y)
    elif method == "softdtw":
        soft_dtw_distance(x, y, cfg.gamma)
    elif method == "dtw-gi":
        dtw_gi_bcd(x, y, "affine_stiefel", cfg)
    elif method == "softdtw-gi":
        soft_dtw_gi_grad(x, y, "affine_stiefel", cfg)
    else:
        raise ValueError(f"unknown method {method!r}; expected one of {TIMING_METHODS}")
    return time.perf_counter() - t0


def timing_study(
    lengths=(8, 16, 32, 64, 128, 256, 512, 1024),
    dims=(2, 4, 8, 16, 32, 64, 128),
    methods=TIMING_METHODS,
    trials: int = 5,
    seed: int = 0,
    cfg: SolverConfig | None = None,
    length_sweep_dim: int = 8,
    dim_sweep_length: int = 32,
) -> list[dict]:
    """Wall time of each method on random series.

    The length sweep uses random series of dimension 8; the dimension
    sweep fixes the length at 32.  Rows: (sweep, method, T, p, trial,
    seconds).
    """
    cfg = cfg or SolverConfig()
    rows = []

    def run_point(sweep, method, t_len, p_dim):
        point_seed = np.random.SeedSequence([seed, zlib.crc32(method.encode()), t_len, p_dim])
        streams = point_seed.spawn(trials + 1)
        for trial in range(-1, trials):
            rng = np.random.default_rng(streams[trial + 1])
            x = generate(GeneratorSpec("random_walk", t_len, dim=p_dim,
                                       seed=int(rng.integers(2 ** 31))))
            y = generate(GeneratorSpec("random_walk", t_len, dim=p_dim,
                                       seed=int(rng.integers(2 ** 31))))
            seconds = _timed_call(method, x, y, cfg)
            if trial >= 0:
                rows.append({
                    "sweep": sweep, "method": method, "T": t_len, "p": p_dim,
                    "trial": trial, "seconds": seconds,
                })

    for method in methods:
        for t_len in lengths:
            run_point("length", method, int(t_len), length_sweep_dim)
    for method in methods:
        for p_dim in dims:
            run_point("dim", method, dim_sweep_length, int(p_dim))
    return rows


def rotation_study(
    trials: int = 50,
    n_angles: int = 16,
    length: int = 48,
    noise_std: float = 0.05,
    methods=ROTATION_METHODS,
    seed: int = 0,
    cfg: SolverConfig | None = None,
) -> list[dict]:
    """Distance of rotated noisy spiral pairs, per angle and method.

    The ratio column divides each cost by the method's own mean cost at
    angle zero.  Rows: (method, theta, trial, cost, ratio_to_theta0).
    """
    cfg = cfg or SolverConfig()
    angles = np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False)
    pairs = generate_pairs_for_rotation_study(trials, angles, length, noise_std, seed)
    rows = []
    for method in methods:
        costs = []
        for x, y, theta in pairs:
            if method == "dtw":
                cost = dtw_distance(x, y)
            elif method == "softdtw":
                cost = soft_dtw_distance(x, y, cfg.gamma)
            elif method == "dtw-gi":
                cost = dtw_gi_bcd(x, y, "affine_stiefel", cfg).cost
            elif method == "softdtw-gi":
                cost = soft_dtw_gi_grad(x, y, "affine_stiefel", cfg).cost
            else:
                raise ValueError(f"unknown method {method!r}")
            costs.append(cost)
        costs = np.asarray(costs).reshape(len(angles), trials)
        base = costs[0].mean()
        for a_idx, theta in enumerate(angles):
            for trial in range(trials):
                rows.append({
                    "method": method, "theta": float(theta), "trial": trial,
                    "cost": float(costs[a_idx, trial]),
                    "ratio_to_theta0": float(costs[a_idx, trial] / base),
                })
    return rows


def forecast_study(
    lambda_grid=(1e-3, 1e-2, 1e-1, 1e0),
    backends=BACKENDS,
    trials: int = 20,
    n_train: int = 12,
    n_test: int = 2,
    length: int = 48,
    split: int = 24,
    gamma: float = 1.0,
    seed: int = 0,
    cfg: SolverConfig | None = None,
) -> list[dict]:
    """Prediction error of each backend over a rotated/warped corpus.

    Distances are computed once per (trial, backend, query) and reused
    across the lambda grid.  The error is the Frobenius norm between the
    predicted and true future, averaged over the trial's test queries.
    Rows: (backend, lambda, trial, l2_error).
    """
    results = {}
    for trial in range(trials):
        train, test = make_forecast_corpus(
            n_train=n_train, n_test=n_test, length=length, split=split,
            seed=seed * 100003 + trial,
        )
        corpus = ForecastCorpus(train, split)
        for backend in backends:
            cached = [
                distances_and_maps(full[:split], corpus, backend, gamma, cfg)
                for full in test
            ]
            for lam in lambda_grid:
                errs = []
                for full, (dists, maps) in zip(test, cached):
                    pred = combine_futures(corpus, dists, maps, lam)
                    errs.append(float(np.linalg.norm(pred - full[split:])))
                results[(backend, float(lam), trial)] = float(np.mean(errs))
    rows = []
    for backend in backends:
        for lam in lambda_grid:
            for trial in range(trials):
                rows.append({
                    "backend": backend, "lambda": float(lam), "trial": trial,
                    "l2_error": results[(backend, float(lam), trial)],
                })
    return rows


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    lx = np.log(np.asarray(xs, dtype=np.float64))
    ly = np.log(np.asarray(ys, dtype=np.float64))
    a = np.vstack([np.ones_like(lx), lx]).T
    coef, *_ = np.linalg.lstsq(a, ly, rcond=None)
    return float(coef[1])


def median_by(rows: list[dict], keys: tuple[str, ...], value: str) -> dict:
    """Median of `value` grouped by the given key columns."""
    groups: dict = {}
    for row in rows:
        groups.setdefault(tuple(row[k] for k in keys), []).append(row[value])
    return {k: float(np.median(v)) for k, v in groups.items()}
