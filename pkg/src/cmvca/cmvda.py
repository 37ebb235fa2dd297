"""Class mean vector discriminant analysis on the whitened kernel subspace.

After whitening, every non-zero eigenvalue of the kernel matrix equals one, so
any orthonormal basis of the whitened span is an eigenbasis. The scaled class
indicators ``sqrt(N_c) e_c`` are such basis vectors and carry all of the
between-class information; the remaining ``N - C`` axes are filled in per
class by Gram-Schmidt against the class indicator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .components import ClassIndicators, class_indicators
from .dataio import Dataset
from .spectral import SpectralModel

_DEPENDENT_TOL = 1e-8


@dataclass(frozen=True)
class WhitenedModel:
    """Whitened training representation ``U_r^T`` of a spectral model."""

    source: SpectralModel

    @property
    def rank(self) -> int:
        return self.source.rank

    @property
    def full_rank(self) -> bool:
        return self.source.rank == self.source.n_samples

    @property
    def representation(self) -> np.ndarray:
        """(rank, N) whitened training coordinates."""
        return self.source.eigenvectors[:, :self.rank].T

    @property
    def projector(self) -> np.ndarray:
        """Gram matrix of the whitened training data, ``U_r U_r^T``."""
        Ur = self.source.eigenvectors[:, :self.rank]
        return Ur @ Ur.T

    def kernel_vectors(self, K_cols) -> np.ndarray:
        """Whitened-space kernel vectors ``U_r lam_r^{-1} U_r^T k`` of new points."""
        K_cols = np.asarray(K_cols, dtype=float)
        r = self.rank
        Ur = self.source.eigenvectors[:, :r]
        inv = 1.0 / self.source.eigenvalues[:r]
        coef = Ur.T @ K_cols
        coef = coef * (inv if coef.ndim == 1 else inv[:, None])
        return Ur @ coef


def whiten(model: SpectralModel) -> WhitenedModel:
    if model.rank < 1:
        raise ValueError("cannot whiten a rank-0 kernel")
    return WhitenedModel(model)


@dataclass(frozen=True)
class IndicatorBasis:
    """Orthonormal axes (columns of ``vectors``) in sample space.

    The first ``n_leading`` columns are the discriminant axes (scaled class
    indicators, or the normalized mean vector for the random basis); the rest
    complete the basis.
    """

    vectors: np.ndarray
    n_leading: int
    leading_classes: tuple = ()
    in_span: bool = False  # already restricted to a whitened span

    @property
    def n_vectors(self) -> int:
        return self.vectors.shape[1]

    def head(self, M: int) -> np.ndarray:
        if not 1 <= M <= self.n_vectors:
            raise ValueError(f"M must lie in 1..{self.n_vectors}, got {M}")
        return self.vectors[:, :M]


def _first_nonzero_positive(v, tol=1e-12):
    nz = np.flatnonzero(np.abs(v) > tol)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def _orthogonalize(v, Q):
    # modified Gram-Schmidt: subtract one direction at a time
    for q in Q:
        v = v - (q @ v) * q
    return v


def indicator_basis(ind: ClassIndicators) -> IndicatorBasis:
    """Scaled class indicators followed by the per-class completion vectors.

    Leading axes are ordered by ``1/N_c`` descending (smallest class first,
    ties by class id). Completion vectors come class by class: the standard
    basis vectors of the class block are orthonormalized against
    ``sqrt(N_c) e_c``, giving ``N_c - 1`` vectors per class.
    """
    counts = ind.counts
    N, C = ind.n_samples, ind.n_classes
    order = np.lexsort((np.arange(C), counts))
    scaled = np.where(ind.E > 0, 1.0 / np.sqrt(counts), 0.0)
    columns = [scaled[:, c] for c in order]

    for c in range(C):
        members = np.flatnonzero(ind.E[:, c])
        Q = [scaled[:, c]]
        for i in members:
            if len(Q) == members.size:
                break
            v = np.zeros(N)
            v[i] = 1.0
            v = _orthogonalize(v, Q)
            norm = np.linalg.norm(v)
            if norm < _DEPENDENT_TOL:
                continue
            v = _first_nonzero_positive(v / norm)
            Q.append(v)
            columns.append(v)
    vectors = np.column_stack(columns)
    vectors.setflags(write=False)
    return IndicatorBasis(vectors, C, tuple(int(c) for c in order))


def cmvda_r_basis(N: int, e=None, seed: int = 0) -> IndicatorBasis:
    """Random orthonormal basis of R^N whose first axis is ``e / ||e||``.

    Remaining axes come from seeded standard normal draws, orthonormalized by
    modified Gram-Schmidt; a draw that is numerically dependent on the axes
    already built (residual norm below 1e-8 of its original norm) is replaced.
    """
    if N < 1:
        raise ValueError("N must be positive")
    if e is None:
        e = np.full(N, 1.0 / N)
    e = np.asarray(e, dtype=float)
    if e.shape != (N,) or not np.linalg.norm(e) > 0:
        raise ValueError("e must be a non-zero N-vector")
    rng = np.random.default_rng(seed)

    Q = np.empty((N, N))
    Q[:, 0] = _first_nonzero_positive(e / np.linalg.norm(e))
    A = rng.standard_normal((N, N - 1))
    A -= np.outer(Q[:, 0], Q[:, 0] @ A)
    for j in range(1, N):
        v = A[:, j - 1]
        ref = np.linalg.norm(v)
        norm = ref
        while norm < _DEPENDENT_TOL * ref or norm == 0.0:
            v = rng.standard_normal(N)
            ref = np.linalg.norm(v)
            v = _orthogonalize(v, Q[:, :j].T)
            norm = np.linalg.norm(v)
        q = v / norm
        # remove the new direction from every later candidate at once
        rest = A[:, j:]
        rest -= np.outer(q, q @ rest)
        Q[:, j] = _first_nonzero_positive(q)
    Q.setflags(write=False)
    return IndicatorBasis(Q, 1)


def whitened_basis(wm: WhitenedModel, basis: IndicatorBasis) -> IndicatorBasis:
    """Restrict ``basis`` to the whitened span when the kernel is rank deficient.

    The axes are projected onto ``range(U_r)`` and orthonormalized in order by
    modified Gram-Schmidt, dropping those that become dependent, which yields
    ``rank`` orthonormal eigenvectors of the whitened Gram matrix. Projected
    class indicators stay first, and every later axis is orthogonal to all of
    them. With a full-rank kernel ``basis`` is returned unchanged.
    """
    if wm.full_rank or basis.in_span:
        return basis
    r = wm.rank
    Ur = wm.source.eigenvectors[:, :r]
    # candidates in the orthonormal coordinates of range(U_r); the identity
    # columns at the end only matter if projection made too many dependent
    A = np.hstack([Ur.T @ basis.vectors, np.eye(r)])
    norms = np.concatenate([np.linalg.norm(basis.vectors, axis=0), np.ones(r)])
    kept = []
    leading = []
    for j in range(A.shape[1]):
        if len(kept) == r:
            break
        v = A[:, j]
        norm = np.linalg.norm(v)
        if norm < _DEPENDENT_TOL * norms[j]:
            continue
        q = v / norm
        A[:, j + 1:] -= np.outer(q, q @ A[:, j + 1:])
        kept.append(q)
        if j < basis.n_leading:
            leading.append(j)
    Q = Ur @ np.column_stack(kept)
    # second pass removes the rounding drift of one-pass Gram-Schmidt
    Q, _ = np.linalg.qr(Q)
    Q = np.column_stack([_first_nonzero_positive(q) for q in Q.T])
    Q.setflags(write=False)
    classes = tuple(basis.leading_classes[j] for j in leading) if basis.leading_classes else ()
    return IndicatorBasis(Q, len(leading), classes, in_span=True)


def _labels_of(data):
    if isinstance(data, Dataset):
        return data.labels, data.n_classes
    labels = np.asarray(data, dtype=np.int64)
    return labels, int(labels.max()) + 1


def cmvda_embed_train(data, M: int, whitened: WhitenedModel = None, basis: IndicatorBasis = None) -> np.ndarray:
    """CMVDA coordinates of the training set, shape (M, N).

    With a full-rank kernel the whitened Gram matrix is the identity and the
    coordinates are the basis vectors themselves: row ``c < C`` holds
    ``1/sqrt(N_c)`` on the members of the c-th leading class. For a
    rank-deficient kernel the basis is first restricted to the whitened span
    (see :func:`whitened_basis`) and ``M`` is bounded by the rank.
    """
    labels, C = _labels_of(data)
    if basis is None:
        basis = indicator_basis(class_indicators(labels, C))
    if whitened is not None:
        basis = whitened_basis(whitened, basis)
    return np.ascontiguousarray(basis.head(M).T)


def cmvda_embed_test(wm: WhitenedModel, basis: IndicatorBasis, K_cols, M: int) -> np.ndarray:
    """CMVDA coordinates of new points given their kernel vectors (N, T), shape (M, T)."""
    K_cols = np.asarray(K_cols, dtype=float)
    if K_cols.ndim == 1:
        K_cols = K_cols[:, None]
    B = whitened_basis(wm, basis).head(M)
    return B.T @ wm.kernel_vectors(K_cols)
