"""Clustering error, per-cluster connectivity and subspace-detection percentage."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse.csgraph import connected_components

from .numerics import sym_eigen

DEGREE_FLOOR = 1e-12
OMP_SDP_THRESHOLD = 1e-8


class LengthMismatch(ValueError):
    pass


def clustering_error(pred, truth) -> float:
    """Fraction of points misclassified under the best one-to-one label matching."""
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.shape != truth.shape:
        raise LengthMismatch(f"{pred.size} predictions for {truth.size} labels")
    if pred.size == 0:
        return 0.0
    _, p = np.unique(pred, return_inverse=True)
    _, t = np.unique(truth, return_inverse=True)
    confusion = np.zeros((p.max() + 1, t.max() + 1), dtype=np.int64)
    np.add.at(confusion, (p.ravel(), t.ravel()), 1)
    rows, cols = linear_sum_assignment(confusion, maximize=True)
    return 1.0 - confusion[rows, cols].sum() / pred.size


def normalized_laplacian(A) -> np.ndarray:
    """``I - D^-1/2 A D^-1/2`` with degrees floored at ``DEGREE_FLOOR``."""
    A = np.asarray(A, dtype=np.float64)
    inv_sqrt = 1.0 / np.sqrt(np.maximum(A.sum(axis=1), DEGREE_FLOOR))
    L = np.eye(A.shape[0]) - inv_sqrt[:, None] * A * inv_sqrt[None, :]
    return 0.5 * (L + L.T)


def cluster_connectivity(A_sub) -> float:
    """Second-smallest eigenvalue of the normalized Laplacian of one cluster."""
    A_sub = np.asarray(A_sub, dtype=np.float64)
    n = A_sub.shape[0]
    if n <= 1:
        return 0.0
    # isolated vertices would otherwise show up as eigenvalue 1, not 0
    n_comp, _ = connected_components(A_sub > 0, directed=False)
    if n_comp > 1:
        return 0.0
    w = sym_eigen(normalized_laplacian(A_sub)).eigenvalues
    return float(max(w[1], 0.0))


def connectivity(A, truth) -> np.ndarray:
    """Connectivity of each ground-truth cluster, ordered by sorted label value."""
    A = np.asarray(A, dtype=np.float64)
    truth = np.asarray(truth).ravel()
    out = []
    for lab in np.unique(truth):
        idx = np.flatnonzero(truth == lab)
        out.append(cluster_connectivity(A[np.ix_(idx, idx)]))
    return np.array(out)


def sdp_flags(C, truth, magnitude_threshold: float = OMP_SDP_THRESHOLD) -> np.ndarray:
    """Per-point subspace detection: a nontrivial column supported only in-cluster.

    ``C`` holds ``c_i`` in column ``i``. Entries with ``|c_ij|`` at or below
    the threshold are treated as zero.
    """
    C = np.asarray(C)
    truth = np.asarray(truth).ravel()
    support = np.abs(C) > magnitude_threshold
    same = truth[:, None] == truth[None, :]
    nontrivial = support.any(axis=0)
    clean = ~(support & ~same).any(axis=0)
    return nontrivial & clean


def sdp_percentage(C, truth, magnitude_threshold: float = OMP_SDP_THRESHOLD) -> float:
    flags = sdp_flags(C, truth, magnitude_threshold)
    return 100.0 * flags.sum() / flags.size
