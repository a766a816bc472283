"""Dense linear-algebra and clustering primitives.

Everything here works on plain ``numpy`` arrays. Data points are stored as
columns (``D x N``) except for :func:`kmeans`, which takes one point per row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# a new atom is dependent if its component outside span(Q) is below this
RANK_TOL = 1e-10
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
SYMMETRY_TOL = 1e-10


class NotSymmetric(ValueError):
    pass


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a finite 2-D float64 array."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains NaN or Inf")
    return m


class IncrementalQR:
    """Thin QR factorization grown one column at a time.

    Columns are orthogonalized by classical Gram-Schmidt with one round of
    reorthogonalization, which keeps ``Q`` orthonormal to working precision.
    """

    def __init__(self, dim: int, capacity: int):
        self.dim = dim
        self.Q = np.zeros((dim, capacity))
        self.R = np.zeros((capacity, capacity))
        self.size = 0

    def try_append(self, v: np.ndarray) -> bool:
        """Add column ``v``; return False (and leave state untouched) if dependent."""
        k = self.size
        if k == self.Q.shape[1]:
            self._grow()
        Qk = self.Q[:, :k]
        h = Qk.T @ v
        w = v - Qk @ h
        h2 = Qk.T @ w
        w -= Qk @ h2
        h += h2
        nrm = np.linalg.norm(w)
        if nrm < RANK_TOL:
            return False
        self.Q[:, k] = w / nrm
        self.R[:k, k] = h
        self.R[k, k] = nrm
        self.size = k + 1
        return True

    def _grow(self):
        cap = max(1, 2 * self.Q.shape[1])
        Q = np.zeros((self.dim, cap))
        R = np.zeros((cap, cap))
        k = self.size
        Q[:, :k] = self.Q[:, :k]
        R[:k, :k] = self.R[:k, :k]
        self.Q, self.R = Q, R

    @property
    def q(self) -> np.ndarray:
        return self.Q[:, : self.size]

    def solve(self, target: np.ndarray) -> np.ndarray:
        """Least-squares coefficients of ``target`` on the appended columns."""
        k = self.size
        rhs = self.q.T @ target
        coeffs = np.zeros(k)
        R = self.R
        for j in range(k - 1, -1, -1):
            coeffs[j] = (rhs[j] - R[j, j + 1 : k] @ coeffs[j + 1 : k]) / R[j, j]
        return coeffs


@dataclass
class Projection:
    coeffs: np.ndarray
    residual: np.ndarray
    rank_deficient: bool = False


def least_squares_project(target, basis) -> Projection:
    """Project ``target`` onto the column span of ``basis``.

    If the basis is numerically rank deficient the minimum-norm solution is
    returned instead and ``rank_deficient`` is set.
    """
    t = np.asarray(target, dtype=np.float64).ravel()
    B = as_matrix(basis)
    if B.shape[0] != t.shape[0]:
        raise ValueError("target and basis have different row counts")
    if B.shape[1] > B.shape[0]:
        raise ValueError("more basis columns than rows")
    qr = IncrementalQR(B.shape[0], B.shape[1])
    for j in range(B.shape[1]):
        if not qr.try_append(B[:, j]):
            coeffs = np.linalg.lstsq(B, t, rcond=None)[0]
            return Projection(coeffs, t - B @ coeffs, rank_deficient=True)
    coeffs = qr.solve(t)
    # residual through Q is orthogonal to the basis to working precision
    residual = t - qr.q @ (qr.q.T @ t)
    return Projection(coeffs, residual)


@dataclass
class SymmetricEigen:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _check_symmetric(M: np.ndarray):
    if M.shape[0] != M.shape[1]:
        raise NotSymmetric(f"matrix is not square: {M.shape}")
    scale = max(np.abs(M).max(), 1.0)
    if np.abs(M - M.T).max() > SYMMETRY_TOL * scale:
        raise NotSymmetric("matrix is not symmetric")


def jacobi_eigen(M: np.ndarray) -> SymmetricEigen:
    """Cyclic Jacobi eigendecomposition, eigenvalues returned ascending."""
    A = 0.5 * (M + M.T)
    n = A.shape[0]
    V = np.eye(n)
    fro = np.linalg.norm(A)
    stop = JACOBI_TOL * fro
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(JACOBI_MAX_SWEEPS):
        # summed directly: sum(A^2) - sum(diag^2) cancels to ~sqrt(eps) * fro
        off = np.linalg.norm(A[offdiag])
        if off <= stop:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                # negligible entries would only overflow theta
                if abs(apq) <= 1e-20 * fro:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap = A[p, :].copy()
                aq = A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return SymmetricEigen(w[order], V[:, order])


def sym_eigen(M, method: str = "lapack") -> SymmetricEigen:
    """Full eigendecomposition of a symmetric matrix, eigenvalues ascending.

    ``method="lapack"`` uses ``numpy.linalg.eigh``; ``method="jacobi"`` runs
    the in-house cyclic Jacobi solver (slow, intended for n up to ~100).
    """
    M = as_matrix(M)
    _check_symmetric(M)
    if method == "jacobi":
        return jacobi_eigen(M)
    if method != "lapack":
        raise ValueError(f"unknown method {method!r}")
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    return SymmetricEigen(w, V)


@dataclass
class KMeansResult:
    labels: np.ndarray
    inertia: float
    degenerate: bool = False


def _kmeans_pp(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = rng.integers(n)
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers[c] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centers[c]) ** 2, axis=1))
    return centers


def _sq_dists(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    return (
        np.sum(points**2, axis=1)[:, None]
        - 2.0 * points @ centers.T
        + np.sum(centers**2, axis=1)[None, :]
    )


def _lloyd(points, centers, max_iter):
    k = centers.shape[0]
    labels = None
    for _ in range(max_iter):
        new = np.argmin(_sq_dists(points, centers), axis=1)
        counts = np.bincount(new, minlength=k)
        if np.any(counts == 0):
            # refill empty clusters with the points farthest from their center
            d = np.sum((points - centers[new]) ** 2, axis=1)
            for c in np.flatnonzero(counts == 0):
                far = int(np.argmax(d))
                new[far] = c
                d[far] = -1.0
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for c in range(k):
            centers[c] = points[labels == c].mean(axis=0)
    inertia = float(np.sum((points - centers[labels]) ** 2))
    return labels, inertia


def kmeans(points, k: int, seed: int = 0, restarts: int = 10, max_iter: int = 300) -> KMeansResult:
    """k-means with k-means++ seeding; best of ``restarts`` runs by inertia."""
    X = as_matrix(points)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    distinct, inverse = np.unique(X, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).ravel()
    if distinct.shape[0] < k:
        # np.unique sorts rows lexicographically
        centers = distinct[inverse]
        return KMeansResult(inverse.astype(np.int64), float(np.sum((X - centers) ** 2)), degenerate=True)
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        centers = _kmeans_pp(X, k, rng)
        labels, inertia = _lloyd(X, centers, max_iter)
        if best is None or inertia < best.inertia:
            best = KMeansResult(labels.astype(np.int64), inertia)
    return best
