"""Sparse self-representation: masked OMP, the active update/drop steps, LASSO.

All solvers take the full ``D x N`` matrix plus the index ``i`` of the point
being represented; ``c_ii`` is always zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .numerics import IncrementalQR

EXACT_TOL = 1e-10  # OMP stops once the residual is this small
DEGENERATE_TOL = 1e-12
LASSO_TOL = 1e-7
LASSO_MAX_SWEEPS = 10_000
LASSO_ALPHA = 20.0
SUPPORT_REL_TOL = 1e-6


class DegenerateUpdateWarning(RuntimeWarning):
    pass


@dataclass
class OpCounter:
    inner_products: int = 0
    flops_estimate: int = 0

    def add(self, n_inner: int, dim: int):
        self.inner_products += n_inner
        self.flops_estimate += 2 * n_inner * dim

    def __iadd__(self, other: "OpCounter"):
        self.inner_products += other.inner_products
        self.flops_estimate += other.flops_estimate
        return self


@dataclass
class SparseColumn:
    """Coefficient vector ``c_i`` stored by its support."""

    indices: np.ndarray
    values: np.ndarray
    length: int
    trivial: bool = False
    converged: bool = True

    def dense(self) -> np.ndarray:
        c = np.zeros(self.length)
        c[self.indices] = self.values
        return c

    @classmethod
    def empty(cls, length: int) -> "SparseColumn":
        return cls(np.zeros(0, dtype=np.int64), np.zeros(0), length, trivial=True)


def omp_represent(x, X, i, mask, d, counter=None) -> SparseColumn:
    """Represent ``x`` with at most ``d`` atoms taken from the active columns of ``X``.

    ``mask[j]`` says whether column ``j`` is still in the dictionary; column
    ``i`` is excluded regardless. Ties in ``|<atom, residual>|`` go to the
    smallest index. Every iteration is charged one inner product per
    available atom.
    """
    N = X.shape[1]
    if d < 1:
        raise ValueError("d must be >= 1")
    candidates = np.flatnonzero(mask)
    candidates = candidates[candidates != i]
    if candidates.size == 0:
        return SparseColumn.empty(N)
    atoms = X[:, candidates]
    n_iter = min(d, candidates.size)
    qr = IncrementalQR(X.shape[0], n_iter)
    usable = np.ones(candidates.size, dtype=bool)
    picked = []
    r = np.array(x, dtype=np.float64)
    for _ in range(n_iter):
        if np.linalg.norm(r) < EXACT_TOL:
            break
        corr = np.abs(atoms.T @ r)
        if counter is not None:
            counter.add(candidates.size, X.shape[0])
        corr[~usable] = -1.0
        k = int(np.argmax(corr))
        while corr[k] >= 0:
            usable[k] = False
            if qr.try_append(atoms[:, k]):
                picked.append(k)
                break
            # numerically inside the current span; skip it
            corr[k] = -1.0
            k = int(np.argmax(corr))
        else:
            break
        q = qr.q[:, -1]
        r = r - q * (q @ r)
    if not picked:
        return SparseColumn.empty(N)
    coeffs = qr.solve(x)
    idx = candidates[picked]
    order = np.argsort(idx)
    return SparseColumn(idx[order], coeffs[order], N)


def residual(x, X, c: SparseColumn) -> np.ndarray:
    """``x - X c`` using only the support of ``c``."""
    if c.indices.size == 0:
        return np.array(x, dtype=np.float64)
    return x - X[:, c.indices] @ c.values


def active_update(x, r, b: float) -> np.ndarray:
    """Shift ``x`` by ``b`` times its residual and renormalize.

    When the shifted vector is (numerically) zero the point is returned
    unchanged with a :class:`DegenerateUpdateWarning`.
    """
    if b == 0:
        return np.array(x, dtype=np.float64)
    y = x + b * r
    nrm = np.linalg.norm(y)
    if nrm <= DEGENERATE_TOL:
        warnings.warn(f"degenerate active update (norm {nrm:.2e}, b={b})", DegenerateUpdateWarning)
        return np.array(x, dtype=np.float64)
    return y / nrm


def maybe_drop(mask: np.ndarray, i: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Return a copy of ``mask`` with entry ``i`` cleared with probability ``p``.

    Exactly one uniform draw is consumed per call, whatever ``p`` is.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    out = mask.copy()
    if rng.random() < p:
        out[i] = False
    return out


def default_lambda(x, X, i, alpha: float = LASSO_ALPHA) -> float:
    """``alpha / mu`` with ``mu`` the largest ``|<x, x_j>|`` over ``j != i``."""
    g = np.abs(X.T @ x)
    g[i] = 0.0
    mu = g.max()
    if mu <= 0:
        return alpha
    return alpha / mu


def soft_threshold(z, t):
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def lasso_objective(c, x, X, lam):
    r = x - X @ c
    return np.abs(c).sum() + 0.5 * lam * r @ r


def kkt_residual(c, x, X, i, lam) -> float:
    """Largest violation of the optimality conditions of the LASSO objective.

    Measured on ``lam * X^T (x - X c)``, which must equal ``sign(c_j)`` on the
    support and lie in ``[-1, 1]`` elsewhere.
    """
    g = lam * (X.T @ (x - X @ c))
    g[i] = 0.0
    on = c != 0
    on[i] = False
    viol = np.zeros_like(g)
    viol[on] = np.abs(g[on] - np.sign(c[on]))
    off = ~on
    off[i] = False
    viol[off] = np.maximum(np.abs(g[off]) - 1.0, 0.0)
    return float(viol.max()) if viol.size else 0.0


def _sign_pattern_solve(c, q, G, lam):
    """Exact minimizer for the current support and signs, or None if it is not optimal.

    Solves the stationarity equations ``G_SS c_S = q_S - sign(c_S) / lam`` and
    accepts the result only if the signs are preserved and every coordinate
    off the support satisfies ``|q_j - G_j c| <= 1 / lam``.
    """
    S = np.flatnonzero(c)
    if S.size == 0:
        return None
    s = np.sign(c[S])
    try:
        cS = np.linalg.solve(G[np.ix_(S, S)], q[S] - s / lam)
    except np.linalg.LinAlgError:
        return None
    if np.any(np.sign(cS) != s):
        return None
    out = np.zeros_like(c)
    out[S] = cS
    return out


def _cd_pass(c, grad, coords, G, diag, thresh) -> float:
    """One cyclic coordinate-descent pass; updates ``c`` and ``grad`` in place."""
    max_delta = 0.0
    for j in coords:
        old = c[j]
        z = grad[j] + diag[j] * old
        if z > thresh:
            new = (z - thresh) / diag[j]
        elif z < -thresh:
            new = (z + thresh) / diag[j]
        else:
            new = 0.0
        delta = new - old
        if delta != 0.0:
            c[j] = new
            grad -= G[:, j] * delta
            max_delta = max(max_delta, abs(delta))
    return max_delta


def lasso_solve(x, X, i, lam, G=None, tol=LASSO_TOL, max_sweeps=LASSO_MAX_SWEEPS, inner_sweeps=5):
    """Coordinate descent for ``min ||c||_1 + lam/2 ||x - X c||^2`` with ``c_i = 0``.

    Each outer round is a full pass over all coordinates, followed by up to
    ``inner_sweeps`` passes over the current support and then the exact
    solution for that support and sign pattern (kept only if the signs
    agree, which can only lower the objective). Convergence is declared when
    a full pass moves no coordinate by ``tol`` or more.

    Returns the dense coefficient vector and a convergence flag. ``G`` is the
    Gram matrix ``X^T X`` and can be shared across points.
    """
    N = X.shape[1]
    if G is None:
        G = X.T @ X
    q = X.T @ x
    diag = np.diag(G).tolist()
    c = np.zeros(N)
    grad = q.copy()  # q - G c
    thresh = 1.0 / lam
    coords = [j for j in range(N) if j != i and diag[j] > 0]
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        if _cd_pass(c, grad, coords, G, diag, thresh) < tol:
            return c, True
        for _ in range(inner_sweeps):
            sweeps += 1
            support = [j for j in coords if c[j] != 0.0]
            if _cd_pass(c, grad, support, G, diag, thresh) < tol:
                break
        exact = _sign_pattern_solve(c, q, G, lam)
        if exact is not None:
            c = exact
            grad = q - G @ c
    return c, False


def lasso_represent(x, X, i, lam=None, alpha=LASSO_ALPHA, G=None) -> SparseColumn:
    """LASSO self-representation of column ``i``; ``lam`` defaults to :func:`default_lambda`."""
    if lam is None:
        lam = default_lambda(x, X, i, alpha)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    c, converged = lasso_solve(x, X, i, lam, G=G)
    c[i] = 0.0
    peak = np.abs(c).max()
    if peak == 0:
        col = SparseColumn.empty(X.shape[1])
        col.converged = converged
        return col
    idx = np.flatnonzero(np.abs(c) > SUPPORT_REL_TOL * peak)
    return SparseColumn(idx, c[idx], X.shape[1], converged=converged)
