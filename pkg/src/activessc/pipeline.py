"""End-to-end subspace clustering: self-representation, affinity, spectral step."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import metrics
from .datagen import LabeledDataset
from .numerics import kmeans, sym_eigen
from .selfrep import (
    LASSO_ALPHA,
    OpCounter,
    SparseColumn,
    active_update,
    lasso_represent,
    maybe_drop,
    omp_represent,
    residual,
)


class Variant(str, enum.Enum):
    L1_SSC = "l1-ssc"
    OMP_SSC = "omp-ssc"
    A_OMP_SSC = "a-omp-ssc"


@dataclass
class AlgorithmParams:
    variant: Variant = Variant.A_OMP_SSC
    d: int = 3
    b: float = 1.0
    p: float = 0.8
    lam: Optional[float] = None  # None: per-point alpha / mu_i
    alpha: float = LASSO_ALPHA
    k: Optional[int] = None  # None: number of ground-truth clusters
    seed: int = 0
    restarts: int = 10

    def __post_init__(self):
        self.variant = Variant(self.variant)
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.variant is Variant.OMP_SSC and (self.b != 0 or self.p != 0):
            raise ValueError("OMP-SSC is the b=0, p=0 case; use A_OMP_SSC for other values")
        if self.lam is not None and self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.k is not None and self.k < 1:
            raise ValueError("k must be >= 1")

    @classmethod
    def omp(cls, d=3, **kw):
        return cls(Variant.OMP_SSC, d=d, b=0.0, p=0.0, **kw)

    @classmethod
    def l1(cls, **kw):
        return cls(Variant.L1_SSC, b=0.0, p=0.0, **kw)

    def streams(self):
        """Independent (drop rng, k-means seed) pair derived from ``seed``."""
        drop_ss, km_ss = np.random.SeedSequence(self.seed).spawn(2)
        return np.random.default_rng(drop_ss), int(km_ss.generate_state(1)[0])


@dataclass
class RepresentationPass:
    C: np.ndarray  # N x N, column i is c_i
    columns: list
    X_final: np.ndarray
    counter: OpCounter
    n_trivial: int = 0
    n_unconverged: int = 0


def _assemble(columns, N) -> np.ndarray:
    C = np.zeros((N, N))
    for i, col in enumerate(columns):
        C[col.indices, i] = col.values
    return C


def self_representation_pass(X, params: AlgorithmParams, rng=None) -> RepresentationPass:
    """Sequential masked-OMP pass with active update and random dropping.

    Point ``i`` is represented against the current (already updated) columns
    of the dictionary that have not been dropped. With ``b=0, p=0`` this is
    plain OMP self-representation.
    """
    if isinstance(X, LabeledDataset):
        X = X.X
    X = np.array(X, dtype=np.float64)
    N = X.shape[1]
    if N < 2:
        raise ValueError("need at least two points")
    if rng is None:
        rng, _ = params.streams()
    mask = np.ones(N, dtype=bool)
    counter = OpCounter()
    columns: list[SparseColumn] = []
    for i in range(N):
        x = X[:, i].copy()
        c = omp_represent(x, X, i, mask, params.d, counter)
        columns.append(c)
        if params.b != 0:
            X[:, i] = active_update(x, residual(x, X, c), params.b)
            counter.flops_estimate += 4 * X.shape[0] * (len(c.indices) + 1)
        mask = maybe_drop(mask, i, params.p, rng)
    n_trivial = sum(c.trivial for c in columns)
    return RepresentationPass(_assemble(columns, N), columns, X, counter, n_trivial)


def l1_representation_pass(X, params: AlgorithmParams) -> RepresentationPass:
    """LASSO self-representation of every point against the fixed dictionary."""
    if isinstance(X, LabeledDataset):
        X = X.X
    X = np.asarray(X, dtype=np.float64)
    D, N = X.shape
    counter = OpCounter()
    G = X.T @ X
    counter.add(N * N, D)
    columns = []
    for i in range(N):
        x = X[:, i]
        counter.add(N, D)
        columns.append(lasso_represent(x, X, i, lam=params.lam, alpha=params.alpha, G=G))
    return RepresentationPass(
        _assemble(columns, N),
        columns,
        X,
        counter,
        n_trivial=sum(c.trivial for c in columns),
        n_unconverged=sum(not c.converged for c in columns),
    )


def build_similarity(C) -> np.ndarray:
    """Symmetric affinity ``|C| + |C|^T`` with zero diagonal."""
    absC = np.abs(np.asarray(C, dtype=np.float64))
    A = absC + absC.T
    np.fill_diagonal(A, 0.0)
    return A


def spectral_embedding(A, k: int) -> np.ndarray:
    """Rows of the ``k`` bottom eigenvectors of the normalized Laplacian, unit-normalized."""
    V = sym_eigen(metrics.normalized_laplacian(A)).eigenvectors[:, :k].copy()
    # sign convention: largest-magnitude entry of each eigenvector positive
    peak = V[np.argmax(np.abs(V), axis=0), np.arange(k)]
    V *= np.where(peak < 0, -1.0, 1.0)
    norms = np.linalg.norm(V, axis=1)
    nz = norms > 0
    V[nz] /= norms[nz, None]
    return V


def spectral_cluster(A, k: int, seed: int = 0, restarts: int = 10) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    if not 1 <= k <= A.shape[0]:
        raise ValueError(f"need 1 <= k <= N, got k={k}, N={A.shape[0]}")
    if k == 1:
        return np.zeros(A.shape[0], dtype=np.int64)
    return kmeans(spectral_embedding(A, k), k, seed=seed, restarts=restarts).labels


@dataclass
class ClusteringResult:
    labels: np.ndarray
    C: np.ndarray
    A: np.ndarray
    inner_products: int
    flops_estimate: int
    wall_time: float
    n_trivial: int = 0
    n_unconverged: int = 0
    error_rate: Optional[float] = None
    connectivity: Optional[np.ndarray] = None
    sdp_percentage: Optional[float] = None

    @property
    def mean_connectivity(self) -> Optional[float]:
        if self.connectivity is None:
            return None
        return float(np.mean(self.connectivity))


def run(data, params: AlgorithmParams) -> ClusteringResult:
    """Cluster ``data`` (a :class:`LabeledDataset` or a bare ``D x N`` matrix)."""
    truth = None
    if isinstance(data, LabeledDataset):
        truth, X = data.truth, data.X
    else:
        X = np.asarray(data, dtype=np.float64)
    k = params.k
    if k is None:
        if truth is None:
            raise ValueError("k must be given when the data carries no labels")
        k = int(np.unique(truth).size)
    drop_rng, km_seed = params.streams()

    t0 = time.perf_counter()
    if params.variant is Variant.L1_SSC:
        rep = l1_representation_pass(X, params)
        sdp_threshold = 0.0  # lasso_represent already pruned the support
    else:
        rep = self_representation_pass(X, params, rng=drop_rng)
        sdp_threshold = metrics.OMP_SDP_THRESHOLD
    A = build_similarity(rep.C)
    labels = spectral_cluster(A, k, seed=km_seed, restarts=params.restarts)
    elapsed = time.perf_counter() - t0

    result = ClusteringResult(
        labels=labels,
        C=rep.C,
        A=A,
        inner_products=rep.counter.inner_products,
        flops_estimate=rep.counter.flops_estimate,
        wall_time=elapsed,
        n_trivial=rep.n_trivial,
        n_unconverged=rep.n_unconverged,
    )
    if truth is not None:
        result.error_rate = metrics.clustering_error(labels, truth)
        result.connectivity = metrics.connectivity(A, truth)
        result.sdp_percentage = metrics.sdp_percentage(rep.C, truth, sdp_threshold)
    return result
