"""Explicit finite-dimensional kernel features: Nystrom and random Fourier.

Both produce an (n, N) representation ``Phi`` with ``Phi^T Phi ~ K``. The
right singular vectors and squared singular values of ``Phi`` stand in for the
eigen-pairs of ``K``, so scoring, selection, whitening and projection run on
the result of :func:`subspace_from_features` unchanged. Kernel vectors of new
points against the training set are ``Phi^T phi(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import linalg

from .dataio import Dataset
from .errors import NumericError
from .kernels import KernelSpec, cross_gram, gram
from .spectral import DEFAULT_RANK_TOL, SpectralModel, decompose, from_eigenpairs


def _features(data):
    return data.features if isinstance(data, Dataset) else np.atleast_2d(np.asarray(data, dtype=float))


@dataclass(frozen=True)
class ApproxFeatures:
    representation: np.ndarray
    method: str
    feature_map: Callable = field(repr=False, compare=False)
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n_features(self) -> int:
        return self.representation.shape[0]

    def transform(self, points) -> np.ndarray:
        """(n, T) features of new points given as rows."""
        return self.feature_map(_features(points))

    def kernel_vectors(self, points) -> np.ndarray:
        """Approximate kernel vectors of new points against the training set, (N, T)."""
        return self.representation.T @ self.transform(points)

    def gram(self) -> np.ndarray:
        G = self.representation.T @ self.representation
        return 0.5 * (G + G.T)


def nystrom(data, spec: KernelSpec, n: int, seed: int, rank_tol: float = DEFAULT_RANK_TOL) -> ApproxFeatures:
    """Nystrom features from ``n`` uniformly sampled reference rows.

    ``Phi = lam_n^{-1/2} U_n^T K_Nn^T`` over the non-null eigen-pairs of the
    reference kernel matrix ``K_nn``.
    """
    X = _features(data)
    N = X.shape[0]
    if not 1 <= n <= N:
        raise ValueError(f"n must lie in 1..{N}, got {n}")
    rng = np.random.default_rng(seed)
    ref = np.sort(rng.choice(N, size=n, replace=False))
    Xref = X[ref]
    ref_model = decompose(gram(Xref, spec), rank_tol)
    r = ref_model.rank
    if r == 0:
        raise NumericError("reference kernel matrix is numerically zero")
    W = ref_model.eigenvectors[:, :r].T / np.sqrt(ref_model.eigenvalues[:r])[:, None]

    def feature_map(P):
        return W @ cross_gram(Xref, P, spec)

    rep = feature_map(X)
    meta = {"reference_indices": ref.tolist(), "seed": seed, "reference_rank": r}
    return ApproxFeatures(rep, "nystrom", feature_map, meta)


def rff(data, sigma: float, n: int, seed: int) -> ApproxFeatures:
    """Random Fourier features ``sqrt(2/n) cos(W x + b)`` for the Gaussian kernel.

    Rows of ``W`` are N(0, sigma^-2 I) draws and ``b`` is uniform on [0, 2 pi).
    """
    X = _features(data)
    if n < 1:
        raise ValueError("n must be positive")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    rng = np.random.default_rng(seed)
    W = rng.normal(0.0, 1.0 / sigma, size=(n, X.shape[1]))
    b = rng.uniform(0.0, 2.0 * np.pi, size=n)
    scale = np.sqrt(2.0 / n)

    def feature_map(P):
        if P.shape[1] != W.shape[1]:
            raise ValueError(f"dimension mismatch: expected D={W.shape[1]}, got {P.shape[1]}")
        return scale * np.cos(W @ P.T + b[:, None])

    meta = {"seed": seed, "sigma": float(sigma), "frequencies": W, "phases": b}
    return ApproxFeatures(feature_map(X), "rff", feature_map, meta)


def subspace_from_features(feat, rank_tol: float = DEFAULT_RANK_TOL) -> SpectralModel:
    """Spectral model of ``Phi^T Phi`` from the thin SVD of the representation."""
    Phi = feat.representation if isinstance(feat, ApproxFeatures) else np.asarray(feat, dtype=float)
    if not np.all(np.isfinite(Phi)):
        raise NumericError("feature representation contains non-finite values")
    try:
        _, s, Vt = linalg.svd(Phi, full_matrices=False)
    except linalg.LinAlgError as exc:
        raise NumericError(f"SVD failed: {exc}") from exc
    if not s.size or s[0] == 0.0:
        raise NumericError("feature representation is zero; nothing to select")
    return from_eigenpairs(s ** 2, Vt.T, rank_tol)
