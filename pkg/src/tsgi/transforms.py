"""Feature-space transform families and their exact registration solves.

Each family supports two uses: given a fixed alignment path, an exact
minimizer of the aligned squared error (the registration half-step of
block-coordinate descent), and for the linear families a parametric
gradient interface (tangent projection + QR retraction) for descent on
the orthonormal-matrix manifold.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .series import as_series

ORTHO_TOL = 1e-8


def _check_orthonormal(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] < p.shape[1]:
        raise ValueError(f"expected a tall (p_x, p_y) matrix, got shape {p.shape}")
    gram = p.T @ p
    err = np.linalg.norm(gram - np.eye(p.shape[1]))
    if err > ORTHO_TOL:
        raise ValueError(f"columns are not orthonormal (||P'P - I|| = {err:.3e})")
    return p


@dataclass(frozen=True)
class StiefelLinear:
    """Linear map f(v) = P v with orthonormal columns (norm-preserving)."""

    P: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "P", _check_orthonormal(self.P))

    @property
    def in_dim(self) -> int:
        return self.P.shape[1]

    @property
    def out_dim(self) -> int:
        return self.P.shape[0]

    def apply(self, y: np.ndarray) -> np.ndarray:
        y = as_series(y, "y")
        if y.shape[1] != self.in_dim:
            raise ValueError(
                f"transform expects p={self.in_dim} features, series has p={y.shape[1]}"
            )
        return y @ self.P.T


@dataclass(frozen=True)
class AffineStiefel:
    """Affine map f(v) = P v + b with P orthonormal-columned."""

    P: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "P", _check_orthonormal(self.P))
        b = np.asarray(self.b, dtype=np.float64).reshape(-1)
        if b.shape[0] != self.P.shape[0]:
            raise ValueError(
                f"offset has dim {b.shape[0]}, linear part maps into dim {self.P.shape[0]}"
            )
        object.__setattr__(self, "b", b)

    @property
    def in_dim(self) -> int:
        return self.P.shape[1]

    @property
    def out_dim(self) -> int:
        return self.P.shape[0]

    def apply(self, y: np.ndarray) -> np.ndarray:
        y = as_series(y, "y")
        if y.shape[1] != self.in_dim:
            raise ValueError(
                f"transform expects p={self.in_dim} features, series has p={y.shape[1]}"
            )
        return y @ self.P.T + self.b


@dataclass(frozen=True)
class ChromaTransposition:
    """Circular shift of the p feature coordinates: coordinate c -> (c + k) mod p."""

    k: int

    def apply(self, y: np.ndarray) -> np.ndarray:
        y = as_series(y, "y")
        return np.roll(y, self.k % y.shape[1], axis=1)


Transform = StiefelLinear | AffineStiefel | ChromaTransposition


def apply(f: Transform, y: np.ndarray) -> np.ndarray:
    """Apply a transform to every observation of a (T, p) series."""
    return f.apply(y)


def identity_embedding(p_x: int, p_y: int) -> np.ndarray:
    """First p_y columns of the p_x identity (the identity when p_x == p_y)."""
    if p_x < p_y:
        raise ValueError(f"need p_x >= p_y, got p_x={p_x} < p_y={p_y}")
    return np.eye(p_x)[:, :p_y].copy()


def random_stiefel(p_x: int, p_y: int, rng: np.random.Generator) -> np.ndarray:
    """Orthonormal-columned (p_x, p_y) matrix from the QR of a Gaussian draw."""
    q, r = np.linalg.qr(rng.standard_normal((p_x, p_y)))
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


def procrustes_solve(x: np.ndarray, y: np.ndarray, path: np.ndarray) -> StiefelLinear:
    """Best orthonormal map of y onto x for a fixed alignment path.

    Maximizes <M, P> with M = sum over path pairs of x_i y_j'; solved by
    the thin SVD M = U S V' with P = U V'.  A rank-deficient M still
    yields a valid maximizer; it is flagged with a RuntimeWarning.
    """
    x = as_series(x, "x")
    y = as_series(y, "y")
    if x.shape[1] < y.shape[1]:
        raise ValueError(f"need p_x >= p_y, got p_x={x.shape[1]} < p_y={y.shape[1]}")
    m = x[path[:, 0]].T @ y[path[:, 1]]
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    if s[0] <= 0 or s[-1] <= s[0] * 1e-12:
        warnings.warn("rank-deficient registration matrix; map is not unique", RuntimeWarning)
    return StiefelLinear(u @ vt)


def affine_procrustes_solve(x: np.ndarray, y: np.ndarray, path: np.ndarray) -> AffineStiefel:
    """Best affine map (orthonormal linear part) of y onto x for a fixed path.

    Centers both series by their path-weighted means (weights are the
    occupation counts of each timestamp on the path), solves the linear
    problem on centered data, and sets b = mean(x) - P mean(y).  This is
    the exact minimizer of the aligned squared error over (P, b): the
    first-order condition in b gives the centering.
    """
    x = as_series(x, "x")
    y = as_series(y, "y")
    xi = path[:, 0]
    yj = path[:, 1]
    mx = x[xi].mean(axis=0)
    my = y[yj].mean(axis=0)
    xc = x - mx
    yc = y - my
    m = xc[xi].T @ yc[yj]
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    if s[0] <= 0 or s[-1] <= s[0] * 1e-12:
        warnings.warn("rank-deficient registration matrix; map is not unique", RuntimeWarning)
    p = u @ vt
    return AffineStiefel(p, mx - p @ my)


def transposition_solve(x: np.ndarray, y: np.ndarray, path: np.ndarray) -> ChromaTransposition:
    """Best circular feature shift of y onto x along a fixed path.

    Exhaustive enumeration over all p shifts (globally optimal by
    construction); ties break toward the smallest shift.
    """
    x = as_series(x, "x")
    y = as_series(y, "y")
    if x.shape[1] != y.shape[1]:
        raise ValueError(
            f"transposition needs equal dims, got p_x={x.shape[1]}, p_y={y.shape[1]}"
        )
    xs = x[path[:, 0]]
    ys = y[path[:, 1]]
    costs = np.array([((xs - np.roll(ys, k, axis=1)) ** 2).sum() for k in range(x.shape[1])])
    return ChromaTransposition(int(np.argmin(costs)))


def stiefel_tangent(p: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Project an ambient gradient onto the tangent space at P."""
    ptg = p.T @ grad
    return grad - p @ ((ptg + ptg.T) / 2.0)


def qr_retract(q: np.ndarray) -> np.ndarray:
    """Retract a tall matrix onto the orthonormal-column manifold via QR."""
    qf, r = np.linalg.qr(q)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return qf * d


def riemannian_grad_step(
    f: AffineStiefel,
    euclid_grad_p: np.ndarray,
    euclid_grad_b: np.ndarray,
    step: float,
) -> AffineStiefel:
    """One projected-gradient step with QR retraction on the linear part.

    The offset takes a plain gradient step; the output always satisfies
    the orthonormal-columns invariant.
    """
    gp = np.asarray(euclid_grad_p, dtype=np.float64)
    gb = np.asarray(euclid_grad_b, dtype=np.float64).reshape(-1)
    if gp.shape != f.P.shape or gb.shape != f.b.shape:
        raise ValueError("gradient shapes do not match the transform")
    if not (np.all(np.isfinite(gp)) and np.all(np.isfinite(gb))):
        raise ValueError("non-finite gradient")
    delta_p = step * stiefel_tangent(f.P, gp)
    delta_b = step * gb
    if not delta_p.any() and not delta_b.any():
        return f
    return AffineStiefel(qr_retract(f.P - delta_p), f.b - delta_b)
