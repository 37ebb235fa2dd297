"""Spectral decomposition of a kernel matrix and the effective-subspace maps.

Eigen-pairs are stored in descending eigenvalue order with a canonical sign
(the first entry of largest magnitude of every eigenvector is positive), so
repeated runs and different LAPACK builds give the same vectors for simple
eigenvalues. Indices into the decomposition are 0-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import NumericError, RankError

DEFAULT_RANK_TOL = 1e-10
_SYM_TOL = 1e-12
_PSD_TOL = 1e-8


def _canonical_signs(U):
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


def _first_nonzero(U, tol=1e-12):
    nz = np.abs(U) > tol
    return np.where(nz.any(axis=0), nz.argmax(axis=0), U.shape[0])


@dataclass(frozen=True)
class SpectralModel:
    """Eigen-pairs of a PSD matrix, descending.

    Attributes
    ----------
    eigenvalues : ndarray, shape (k,)
        Non-negative, descending; values at or below ``threshold`` are 0.
    eigenvectors : ndarray, shape (N, k)
        Orthonormal columns. ``k = N`` for an exact decomposition; approximate
        kernels may keep a thin basis.
    rank : int
        Number of eigenvalues above ``threshold = rank_tol * eigenvalues[0]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    rank: int
    rank_tol: float = DEFAULT_RANK_TOL

    @property
    def n_samples(self) -> int:
        return self.eigenvectors.shape[0]

    @property
    def threshold(self) -> float:
        return self.rank_tol * float(self.eigenvalues[0]) if self.eigenvalues.size else 0.0

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.T

    def check_dims(self, dims):
        dims = np.asarray(dims, dtype=np.int64).reshape(-1)
        bad = dims[(dims < 0) | (dims >= self.rank)]
        if bad.size:
            raise RankError(
                f"dimensions {bad.tolist()} have eigenvalue <= {self.threshold:.3g} "
                f"(rank {self.rank})"
            )
        return dims


def from_eigenpairs(eigenvalues, eigenvectors, rank_tol=DEFAULT_RANK_TOL) -> SpectralModel:
    """Canonicalize raw eigen-pairs (any order and sign) into a SpectralModel.

    Raises NumericError if an eigenvalue is below ``-1e-8 * max eigenvalue``.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    U = _canonical_signs(np.asarray(eigenvectors, dtype=float))
    top = lam.max() if lam.size else 0.0
    if lam.size and lam.min() < -_PSD_TOL * max(top, 0.0):
        raise NumericError(
            f"matrix is not positive semi-definite: eigenvalue {lam.min():.3g} "
            f"against largest {top:.3g}"
        )
    order = np.lexsort((_first_nonzero(U), -lam))
    lam = lam[order]
    U = np.ascontiguousarray(U[:, order])

    tau = rank_tol * lam[0] if lam.size and lam[0] > 0 else 0.0
    lam = np.where(lam > tau, lam, 0.0)
    rank = int(np.count_nonzero(lam))
    lam.setflags(write=False)
    U.setflags(write=False)
    return SpectralModel(lam, U, rank, rank_tol)


def decompose(K, rank_tol: float = DEFAULT_RANK_TOL) -> SpectralModel:
    """Symmetric eigendecomposition ``K = U diag(lam) U^T`` (no centering)."""
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"kernel matrix must be square, got {K.shape}")
    if not np.all(np.isfinite(K)):
        raise NumericError("kernel matrix contains non-finite values")
    asym = np.abs(K - K.T)
    if np.any(asym > _SYM_TOL * np.maximum(1.0, np.abs(K))):
        raise NumericError(f"kernel matrix is not symmetric (max deviation {asym.max():.3g})")
    try:
        lam, U = linalg.eigh(K)
    except linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed: {exc}") from exc
    return from_eigenpairs(lam, U, rank_tol)


def embed_training(model: SpectralModel) -> np.ndarray:
    """Effective-subspace coordinates of the training set, shape (rank, N).

    Row ``d`` is ``sqrt(lam_d) * u_d``.
    """
    r = model.rank
    return np.sqrt(model.eigenvalues[:r])[:, None] * model.eigenvectors[:, :r].T


def project(model: SpectralModel, k, dims) -> np.ndarray:
    """Out-of-sample coordinates ``lam_l^{-1/2} u_l^T k`` for each ``l`` in ``dims``.

    ``k`` is a kernel vector against the training set, or an (N, T) matrix of
    them; the result has shape ``(len(dims),)`` or ``(len(dims), T)``.
    """
    dims = model.check_dims(dims)
    k = np.asarray(k, dtype=float)
    if k.shape[0] != model.n_samples:
        raise ValueError(f"kernel vector length {k.shape[0]} != N = {model.n_samples}")
    U = model.eigenvectors[:, dims]
    scale = 1.0 / np.sqrt(model.eigenvalues[dims])
    out = U.T @ k
    return out * (scale if k.ndim == 1 else scale[:, None])
