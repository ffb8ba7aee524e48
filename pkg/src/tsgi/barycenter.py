"""Barycenters of time series under joint-alignment geometry.

``dba_gi`` alternates, DBA-style, between (a) a joint alignment solve of
every input against the current barycenter and (b) a closed-form
per-timestamp update.  For fixed transforms (P_i, c_i) and paths pi_i the
fixed-alignment loss

    sum_i w_i sum_{(s,t) in pi_i} || x_{i,s} - (P_i b_t + c_i) ||^2

is, per timestamp t, a quadratic in b_t whose Hessian is
(sum_i w_i n_{i,t}) I because each P_i has orthonormal columns
(||x - P b - c||^2 = ||P'(x - c) - b||^2 + const).  Setting the gradient
to zero gives the exact update

    b_t = ( sum_i w_i sum_{(s,t) in pi_i} P_i' (x_{i,s} - c_i) )
          / ( sum_i w_i n_{i,t} ),

with n_{i,t} the number of path pairs matching timestamp t (positive for
every t by path connectivity).  Both half-steps are exact minimizations,
so the loss trace is non-increasing.

``soft_barycenter_gi`` instead runs joint gradient descent on the
smooth soft objective over the barycenter coordinates and all transform
parameters, with optional minibatch gradient sampling over the inputs.

Baseline (transform-free) variants of both are exposed through
family="identity"; they require all inputs to share the barycenter
dimensionality.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import _dp
from .align import cost_matrix, dtw
from .gi import SolverConfig, dtw_gi_bcd, softdtw_gi_value_and_grads
from .series import as_series, resample_linear
from .transforms import (
    AffineStiefel,
    Transform,
    identity_embedding,
    qr_retract,
    stiefel_tangent,
)

BARYCENTER_FAMILIES = ("affine_stiefel", "stiefel", "identity")


@dataclass
class BarycenterProblem:
    """Inputs, weights and target shape of a barycenter computation.

    Defaults: uniform weights, median input length, smallest input
    dimensionality.  The target dimensionality can never exceed the
    dimensionality of any input.
    """

    inputs: list[np.ndarray]
    weights: np.ndarray | None = None
    length: int | None = None
    dim: int | None = None

    def __post_init__(self):
        if not self.inputs:
            raise ValueError("need at least one input series")
        self.inputs = [as_series(x, f"inputs[{i}]") for i, x in enumerate(self.inputs)]
        n = len(self.inputs)
        if self.weights is None:
            w = np.full(n, 1.0 / n)
        else:
            w = np.asarray(self.weights, dtype=np.float64)
            if w.shape != (n,) or np.any(w < 0) or w.sum() <= 0:
                raise ValueError("weights must be nonnegative with a positive sum")
            w = w / w.sum()
        self.weights = w
        if self.length is None:
            self.length = int(np.median([x.shape[0] for x in self.inputs]))
        if self.dim is None:
            self.dim = min(x.shape[1] for x in self.inputs)
        min_p = min(x.shape[1] for x in self.inputs)
        if not 1 <= self.dim <= min_p:
            raise ValueError(
                f"target dim must be in [1, {min_p}] (smallest input dim), got {self.dim}"
            )
        if self.length < 1:
            raise ValueError(f"target length must be >= 1, got {self.length}")


@dataclass
class Barycenter:
    """A (T, p) barycenter plus the per-input transforms/paths that produced it."""

    series: np.ndarray
    transforms: list[Transform | None]
    paths: list[np.ndarray] | None
    loss: float
    loss_trace: np.ndarray = field(repr=False)
    converged: bool = False


def _check_family(problem: BarycenterProblem, family: str) -> None:
    if family not in BARYCENTER_FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {BARYCENTER_FAMILIES}")
    if family == "identity":
        dims = sorted({x.shape[1] for x in problem.inputs})
        if dims != [problem.dim]:
            raise ValueError(
                "baseline (identity-transform) barycenters require every input to share "
                f"the barycenter dimensionality; got input dims {dims} with target dim "
                f"{problem.dim} — use a GI family for mixed-dimension sets"
            )


def _initial_barycenter(problem: BarycenterProblem, rng: np.random.Generator) -> np.ndarray:
    pick = problem.inputs[int(rng.integers(len(problem.inputs)))]
    return resample_linear(pick, problem.length)[:, : problem.dim].copy()


def _aligned_loss(problem, bary, transforms, paths) -> float:
    total = 0.0
    for x, w, f, path in zip(problem.inputs, problem.weights, transforms, paths):
        z = bary if f is None else f.apply(bary)
        diff = x[path[:, 0]] - z[path[:, 1]]
        total += w * float((diff * diff).sum())
    return total


def aligned_loss(problem: BarycenterProblem, result: Barycenter) -> float:
    """Hard aligned loss of a barycenter, recomputed from its paths/transforms.

    For ``dba_gi`` results this reproduces ``result.loss``; for the soft
    solver it gives the comparable hard value of the soft solution.
    """
    return _aligned_loss(problem, result.series, result.transforms, result.paths)


def dba_gi(
    problem: BarycenterProblem,
    cfg: SolverConfig | None = None,
    family: str = "affine_stiefel",
) -> Barycenter:
    """Barycenter by alternating joint alignments and closed-form updates.

    Inner alignment solves are warm-started from the previous outer
    iteration's transforms (keeping the loss trace non-increasing);
    cfg.restarts applies to the first outer iteration only.  Stops when
    the loss improves by less than cfg.tolerance or max_iter is reached.
    """
    cfg = cfg or SolverConfig()
    _check_family(problem, family)
    rng = np.random.default_rng(cfg.seed)
    bary = _initial_barycenter(problem, rng)
    n = len(problem.inputs)
    transforms: list[Transform | None] = [None] * n
    paths: list[np.ndarray] = [None] * n
    warm_cfg = replace(cfg, restarts=1)
    trace: list[float] = []
    loss = np.inf
    converged = False

    for outer in range(cfg.max_iter):
        for i, x in enumerate(problem.inputs):
            if family == "identity":
                _, paths[i] = dtw(cost_matrix(x, bary))
            else:
                res = dtw_gi_bcd(
                    x, bary, family,
                    cfg if outer == 0 else warm_cfg,
                    init=transforms[i],
                )
                transforms[i], paths[i] = res.transform, res.path

        num = np.zeros((problem.length, problem.dim))
        den = np.zeros(problem.length)
        for x, w, f, path in zip(problem.inputs, problem.weights, transforms, paths):
            if f is None:
                contrib = x[path[:, 0]]
            elif isinstance(f, AffineStiefel):
                contrib = (x[path[:, 0]] - f.b) @ f.P
            else:
                contrib = x[path[:, 0]] @ f.P
            np.add.at(num, path[:, 1], w * contrib)
            np.add.at(den, path[:, 1], w)
        assert np.all(den > 0), "unmatched barycenter timestamp (impossible for admissible paths)"
        bary = num / den[:, None]

        new_loss = _aligned_loss(problem, bary, transforms, paths)
        trace.append(new_loss)
        if loss - new_loss < cfg.tolerance:
            converged = True
            loss = new_loss
            break
        loss = new_loss

    return Barycenter(
        series=bary,
        transforms=list(transforms),
        paths=list(paths),
        loss=float(loss),
        loss_trace=np.asarray(trace),
        converged=converged,
    )


def _soft_loss_and_grads(problem, bary, ps, cs, gamma, idx):
    """Soft loss over inputs[idx] plus gradients on bary and each (P_i, c_i)."""
    t, p = bary.shape
    g_bary = np.zeros((t, p))
    g_ps = [None] * len(problem.inputs)
    g_cs = [None] * len(problem.inputs)
    total = 0.0
    for i in idx:
        x = problem.inputs[i]
        w = problem.weights[i]
        z = bary @ ps[i].T + cs[i]
        c = _dp.sq_dists(x, z)
        r = _dp.softdtw_acc(c, gamma)
        total += w * float(r[-1, -1])
        e = _dp.softdtw_grad(c, r, gamma)
        col = e.sum(axis=0)
        gz = -2.0 * (e.T @ x - col[:, None] * z)
        g_ps[i] = w * (gz.T @ bary)
        g_cs[i] = w * gz.sum(axis=0)
        g_bary += w * (gz @ ps[i])
    return total, g_bary, g_ps, g_cs


def soft_barycenter_gi(
    problem: BarycenterProblem,
    cfg: SolverConfig | None = None,
    family: str = "affine_stiefel",
    batch_size: int | None = None,
) -> Barycenter:
    """Barycenter by joint gradient descent on the soft objective.

    Descends simultaneously on the barycenter coordinates and all
    transform parameters; linear parts move along the manifold (tangent
    projection + QR retraction).  When batch_size is set, gradients are
    estimated from a random input subset each iteration (rescaled by the
    sampled weight mass) while the full loss still drives step
    halving and early stopping.
    """
    cfg = cfg or SolverConfig()
    _check_family(problem, family)
    gamma = float(cfg.gamma)
    if not gamma > 0.0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    rng = np.random.default_rng(cfg.seed)
    bary = _initial_barycenter(problem, rng)
    n = len(problem.inputs)
    ps = [identity_embedding(x.shape[1], problem.dim) for x in problem.inputs]
    cs = [np.zeros(x.shape[1]) for x in problem.inputs]
    move_transforms = family != "identity"
    move_offsets = family == "affine_stiefel"
    all_idx = np.arange(n)

    def full_loss(bary_, ps_, cs_):
        total = 0.0
        for i in range(n):
            z = bary_ @ ps_[i].T + cs_[i]
            c = _dp.sq_dists(problem.inputs[i], z)
            total += problem.weights[i] * float(_dp.softdtw_acc(c, gamma)[-1, -1])
        return total

    value = full_loss(bary, ps, cs)
    best = (value, bary, [p.copy() for p in ps], [c.copy() for c in cs])
    trace = [value]
    step = cfg.step_size
    stall = 0
    converged = False

    for _ in range(cfg.max_iter):
        if batch_size is not None and batch_size < n:
            idx = rng.choice(n, size=batch_size, replace=False)
            scale = 1.0 / problem.weights[idx].sum()
        else:
            idx = all_idx
            scale = 1.0
        _, g_bary, g_ps, g_cs = _soft_loss_and_grads(problem, bary, ps, cs, gamma, idx)

        new_bary = bary - step * scale * g_bary
        new_ps = [p.copy() for p in ps]
        new_cs = [c.copy() for c in cs]
        if move_transforms:
            for i in idx:
                new_ps[i] = qr_retract(ps[i] - step * scale * stiefel_tangent(ps[i], g_ps[i]))
                if move_offsets:
                    new_cs[i] = cs[i] - step * scale * g_cs[i]
        new_value = full_loss(new_bary, new_ps, new_cs)
        if new_value <= value:
            bary, ps, cs, value = new_bary, new_ps, new_cs, new_value
        else:
            step *= 0.5
        trace.append(value)
        if value < best[0] - cfg.tolerance:
            stall = 0
        else:
            stall += 1
        if value < best[0]:
            best = (value, bary, [p.copy() for p in ps], [c.copy() for c in cs])
        if stall >= cfg.patience:
            converged = True
            break

    value, bary, ps, cs = best
    transforms: list[Transform | None] = []
    paths: list[np.ndarray] = []
    for i in range(n):
        if family == "identity":
            f: Transform | None = None
            z = bary
        else:
            f = AffineStiefel(ps[i], cs[i])
            z = f.apply(bary)
        transforms.append(f)
        _, path = dtw(cost_matrix(problem.inputs[i], z))
        paths.append(path)

    return Barycenter(
        series=bary,
        transforms=transforms,
        paths=paths,
        loss=float(value),
        loss_trace=np.asarray(trace),
        converged=converged,
    )
