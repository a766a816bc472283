"""Synthetic union-of-subspaces data and CSV loading."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

ZERO_COLUMN_TOL = 1e-12


class InfeasibleModel(ValueError):
    pass


class ParseError(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class ZeroColumn(ValueError):
    pass


@dataclass
class SubspaceModel:
    ambient_dim: int
    subspace_dims: Sequence[int]
    samples_per_subspace: Sequence[int]
    noise_level: float = 0.0
    seed: int = 0

    def __post_init__(self):
        self.subspace_dims = [int(d) for d in self.subspace_dims]
        self.samples_per_subspace = [int(n) for n in self.samples_per_subspace]
        if len(self.subspace_dims) != len(self.samples_per_subspace):
            raise InfeasibleModel("subspace_dims and samples_per_subspace differ in length")
        if not self.subspace_dims:
            raise InfeasibleModel("need at least one subspace")
        if any(d < 1 for d in self.subspace_dims):
            raise InfeasibleModel("subspace dimensions must be >= 1")
        if sum(self.subspace_dims) > self.ambient_dim:
            raise InfeasibleModel(
                f"sum of subspace dims {sum(self.subspace_dims)} exceeds ambient dim {self.ambient_dim}"
            )
        if any(n < 1 for n in self.samples_per_subspace):
            raise InfeasibleModel("every subspace needs at least one sample")
        if self.noise_level < 0:
            raise InfeasibleModel("noise_level must be >= 0")

    @classmethod
    def uniform(cls, ambient_dim, n_subspaces, dim, samples, noise_level=0.0, seed=0):
        return cls(ambient_dim, [dim] * n_subspaces, [samples] * n_subspaces, noise_level, seed)


@dataclass
class LabeledDataset:
    X: np.ndarray
    truth: Optional[np.ndarray] = None
    permutation: Optional[np.ndarray] = None
    bases: list = field(default_factory=list)

    @property
    def n_points(self) -> int:
        return self.X.shape[1]

    @property
    def n_clusters(self) -> Optional[int]:
        if self.truth is None:
            return None
        return int(np.unique(self.truth).size)


def noise(rng: np.random.Generator, shape, level: float) -> np.ndarray:
    """Gaussian noise columns with expected squared norm ``level**2``."""
    return rng.normal(0.0, level / np.sqrt(shape[0]), size=shape)


def generate(model: SubspaceModel, rng: Optional[np.random.Generator] = None) -> LabeledDataset:
    """Draw a noisy union of random linear subspaces, columns permuted.

    Each clean point is uniform on its subspace's unit sphere. Noise has
    i.i.d. ``N(0, noise_level**2 / D)`` entries (so its expected squared norm
    is ``noise_level**2``) and is added before the column is renormalized.
    """
    if rng is None:
        rng = np.random.default_rng(model.seed)
    D = model.ambient_dim
    cols, labels, bases = [], [], []
    for ell, (d, n) in enumerate(zip(model.subspace_dims, model.samples_per_subspace)):
        U, _ = np.linalg.qr(rng.standard_normal((D, d)))
        coords = rng.standard_normal((d, n))
        coords /= np.linalg.norm(coords, axis=0)
        cols.append(U @ coords)
        labels.append(np.full(n, ell, dtype=np.int64))
        bases.append(U)
    X = np.hstack(cols)
    truth = np.concatenate(labels)
    if model.noise_level > 0:
        X = X + noise(rng, X.shape, model.noise_level)
        X /= np.linalg.norm(X, axis=0)
    perm = rng.permutation(X.shape[1])
    return LabeledDataset(X[:, perm], truth[perm], perm, bases)


def save_matrix(path, X: np.ndarray, labels_path=None, truth=None):
    """Write ``X`` as headerless CSV (one row per ambient dimension)."""
    # repr-precision so a load gives back the same doubles
    np.savetxt(path, np.asarray(X), delimiter=",", fmt="%.17g")
    if labels_path is not None:
        if truth is None:
            raise ValueError("labels_path given without truth")
        np.savetxt(labels_path, np.asarray(truth, dtype=np.int64), fmt="%d")


def load_matrix(path, labels_path=None) -> LabeledDataset:
    """Load a CSV data matrix, normalize its columns, optionally attach labels."""
    path = Path(path)
    try:
        X = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if X.size == 0:
        raise ParseError(f"{path}: empty matrix")
    if not np.all(np.isfinite(X)):
        raise ParseError(f"{path}: non-finite entries")
    norms = np.linalg.norm(X, axis=0)
    bad = np.flatnonzero(norms < ZERO_COLUMN_TOL)
    if bad.size:
        raise ZeroColumn(f"{path}: column {int(bad[0])} has zero norm")
    X = X / norms
    truth = None
    if labels_path is not None:
        try:
            truth = np.loadtxt(labels_path, dtype=np.int64, ndmin=1)
        except ValueError as exc:
            raise ParseError(f"{labels_path}: {exc}") from exc
        if truth.shape[0] != X.shape[1]:
            raise DimensionMismatch(
                f"{labels_path}: {truth.shape[0]} labels for {X.shape[1]} points"
            )
    return LabeledDataset(X, truth)
