"""Per-eigen-pair scores and subspace selection.

With ``K = sum_d lam_d u_d u_d^T`` and class indicator vectors ``e_c``
(``1/N_c`` on the members of class ``c``), the squared distance between two
class means in kernel space splits over eigen-pairs::

    d(k, m) = sum_d lam_d (u_d^T (e_k - e_m))^2

and so does the prior-weighted sum over all class pairs,
``D = sum_{k,m} p_k p_m d(k, m) = sum_d lam_d D_d``. CMVCA keeps the
eigen-pairs with the largest ``lam_d D_d``; kPCA, kECA and the per-axis
Rayleigh quotient rank the same eigen-pairs by other scores.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy import linalg

from .spectral import SpectralModel, embed_training, project

CRITERIA = ("kpca", "keca", "cmvca", "rayleigh")


@dataclass(frozen=True)
class ClassIndicators:
    """Columns of ``E`` are the indicator vectors ``e_c``; ``e`` is ``1/N`` everywhere."""

    E: np.ndarray
    e: np.ndarray
    counts: np.ndarray

    @property
    def n_classes(self) -> int:
        return self.E.shape[1]

    @property
    def n_samples(self) -> int:
        return self.E.shape[0]

    @property
    def priors(self) -> np.ndarray:
        return self.counts / self.n_samples


def class_indicators(labels, n_classes=None) -> ClassIndicators:
    labels = np.asarray(labels, dtype=np.int64)
    if n_classes is None:
        n_classes = int(labels.max()) + 1
    counts = np.bincount(labels, minlength=n_classes)
    if np.any(counts == 0):
        raise ValueError(f"empty classes: {np.flatnonzero(counts == 0).tolist()}")
    N = labels.size
    E = np.zeros((N, n_classes))
    E[np.arange(N), labels] = 1.0 / counts[labels]
    e = np.full(N, 1.0 / N)
    for a in (E, e, counts):
        a.setflags(write=False)
    return ClassIndicators(E, e, counts)


def _cos2(U, V):
    """Squared cosines between the columns of U and V; 0 against a zero column."""
    un = np.linalg.norm(U, axis=0)
    vn = np.linalg.norm(V, axis=0)
    G = U.T @ V
    denom = np.outer(un, vn)
    out = np.zeros_like(G)
    np.divide(G ** 2, denom ** 2, out=out, where=denom > 0)
    return out


def class_pair_distance(model: SpectralModel, ind: ClassIndicators, k: int, m: int) -> float:
    """Squared distance between the kernel-space means of classes ``k`` and ``m``."""
    if k == m:
        return 0.0
    proj = model.eigenvectors.T @ (ind.E[:, k] - ind.E[:, m])
    return float(np.sum(model.eigenvalues * proj ** 2))


def _pair_distances(model, ind):
    # (k, D) coordinates of class means in the effective subspace, all eigen-pairs
    means = np.sqrt(model.eigenvalues)[:, None] * (model.eigenvectors.T @ ind.E)
    C = ind.n_classes
    out = np.zeros((C, C))
    for k, m in product(range(C), repeat=2):
        if k != m:
            out[k, m] = np.sum((means[:, k] - means[:, m]) ** 2)
    return out


def criterion_total(model: SpectralModel, ind: ClassIndicators) -> float:
    """Prior-weighted sum of squared class-mean distances, ``sum_{k,m} p_k p_m d(k,m)``."""
    p = ind.priors
    return float(np.sum(np.outer(p, p) * _pair_distances(model, ind)))


def criterion_kernel_entries(K, ind: ClassIndicators) -> float:
    """Same quantity straight from kernel entries, ``e_k^T K e_k - 2 e_k^T K e_m + e_m^T K e_m``.

    This is also the Parzen-window estimate of the weighted Euclidean
    divergence between the class densities; no eigendecomposition involved.
    """
    K = np.asarray(K, dtype=float)
    G = ind.E.T @ K @ ind.E
    g = np.diag(G)
    p = ind.priors
    d = g[:, None] - 2.0 * G + g[None, :]
    np.fill_diagonal(d, 0.0)
    return float(np.sum(np.outer(p, p) * d))


def criterion_total_mean(embedding, labels) -> float:
    """``2 sum_k p_k ||m_k - m||^2`` for explicit coordinates (columns are samples)."""
    Y = np.asarray(embedding, dtype=float)
    ind = class_indicators(labels)
    class_means = Y @ ind.E
    total_mean = Y @ ind.e
    return float(2.0 * np.sum(ind.priors * np.sum((class_means - total_mean[:, None]) ** 2, axis=0)))


def criterion_input_space(X, labels):
    """Linear-kernel criterion through the eigenvectors of the input-space scatter.

    ``X`` holds samples as rows. With ``v_d`` the eigenvectors of the
    uncentered scatter ``S_T = X^T X``, returns ``(D, cos2)`` where
    ``D = 2 sum_d sum_k p_k (v_d^T (m_k - m))^2`` and ``cos2[d, k]`` is
    ``cos^2(v_d, m_k - m)``; each column of ``cos2`` sums to one.
    """
    X = np.asarray(X, dtype=float)
    ind = class_indicators(labels)
    _, V = linalg.eigh(X.T @ X)
    diffs = X.T @ ind.E - (X.T @ ind.e)[:, None]
    proj = V.T @ diffs
    D = 2.0 * float(np.sum(ind.priors * np.sum(proj ** 2, axis=0)))
    return D, _cos2(V, diffs)


@dataclass(frozen=True)
class ComponentScores:
    """Scores of the first ``rank`` eigen-pairs.

    ``cmvca[d] = lam[d] * alignment[d]`` is the contribution of eigen-pair
    ``d`` to the class-mean criterion; these sum to :func:`criterion_total`.
    """

    lam: np.ndarray
    entropy: np.ndarray
    cmvca: np.ndarray
    rayleigh: np.ndarray
    alignment: np.ndarray
    model: SpectralModel = field(default=None, repr=False, compare=False)

    def __len__(self):
        return self.lam.size

    def by(self, criterion: str) -> np.ndarray:
        fields = {"kpca": "lam", "keca": "entropy", "cmvca": "cmvca", "rayleigh": "rayleigh"}
        if criterion not in fields:
            raise ValueError(f"unknown criterion {criterion!r}; expected one of {CRITERIA}")
        return getattr(self, fields[criterion])


def score_components(model: SpectralModel, ind: ClassIndicators) -> ComponentScores:
    r = model.rank
    U = model.eigenvectors[:, :r]
    lam = model.eigenvalues[:r].copy()
    N = ind.n_samples
    C = ind.n_classes
    counts = ind.counts.astype(float)

    entropy = lam * (U.sum(axis=0)) ** 2

    # D_d = 1/N^2 sum_{k,m} (N_k + N_m) cos^2(u_d, e_k - e_m); k == m terms vanish
    alignment = np.zeros(r)
    for k, m in product(range(C), repeat=2):
        if k == m:
            continue
        diff = (ind.E[:, k] - ind.E[:, m])[:, None]
        alignment += (counts[k] + counts[m]) * _cos2(U, diff)[:, 0]
    alignment /= N ** 2

    rayleigh = _cos2(U, ind.E) @ (1.0 / counts)
    return ComponentScores(lam, entropy, lam * alignment, rayleigh, alignment, model)


@dataclass(frozen=True)
class SubspaceMap:
    """Ordered eigen-pair indices chosen under one criterion."""

    dims: np.ndarray
    criterion: str
    model: SpectralModel

    @property
    def n_components(self) -> int:
        return self.dims.size

    def training_embedding(self) -> np.ndarray:
        return embed_training(self.model)[self.dims]

    def transform(self, K_cols) -> np.ndarray:
        return project_dataset(self, K_cols)


def ranking(scores: ComponentScores, criterion: str) -> np.ndarray:
    """All eigen-pair indices by descending score, ties by ascending index."""
    s = scores.by(criterion)
    return np.lexsort((np.arange(s.size), -s))


def select(scores: ComponentScores, criterion: str, M: int) -> SubspaceMap:
    """The ``M`` eigen-pairs with the largest score under ``criterion``.

    For ``cmvca`` the scores are non-negative and additive, so this also
    minimizes ``(D - D_selected)^2`` over all subsets of size ``M``.
    """
    if not 1 <= M <= len(scores):
        raise ValueError(f"M must lie in 1..{len(scores)}, got {M}")
    dims = ranking(scores, criterion)[:M]
    dims.setflags(write=False)
    return SubspaceMap(dims, criterion, scores.model)


def criterion_gap(scores: ComponentScores, dims) -> float:
    """``(D - D_selected)^2`` with the CMVCA scores of ``dims``."""
    total = float(np.sum(scores.cmvca))
    kept = float(np.sum(scores.cmvca[np.asarray(dims, dtype=np.int64)]))
    return (total - kept) ** 2


def project_dataset(smap: SubspaceMap, K_cols) -> np.ndarray:
    """Coordinates in the selected subspace for columns of kernel vectors, shape (M, T)."""
    K_cols = np.asarray(K_cols, dtype=float)
    if K_cols.ndim == 1:
        K_cols = K_cols[:, None]
    return project(smap.model, K_cols, smap.dims)


@dataclass(frozen=True)
class KDAProjector:
    """Discriminant directions ``W`` (rank x M) in the whitened effective subspace."""

    model: SpectralModel
    W: np.ndarray
    eigenvalues: np.ndarray

    @property
    def n_components(self) -> int:
        return self.W.shape[1]

    def training_embedding(self) -> np.ndarray:
        r = self.model.rank
        return self.W.T @ self.model.eigenvectors[:, :r].T

    def transform(self, K_cols) -> np.ndarray:
        K_cols = np.asarray(K_cols, dtype=float)
        if K_cols.ndim == 1:
            K_cols = K_cols[:, None]
        r = self.model.rank
        # whitened coordinates of a new point: lam^{-1/2} * (lam^{-1/2} u^T k)
        y = project(self.model, K_cols, np.arange(r))
        return self.W.T @ (y / np.sqrt(self.model.eigenvalues[:r])[:, None])


def kda_baseline(model: SpectralModel, ind: ClassIndicators, M: int) -> KDAProjector:
    """Kernel discriminant analysis in the whitened effective subspace.

    The centered between-class scatter ``sum_k N_k (m_k - m)(m_k - m)^T`` of
    the whitened training data has rank at most ``C - 1``, which bounds ``M``.
    """
    C = ind.n_classes
    if not 1 <= M <= C - 1:
        raise ValueError(f"KDA yields at most C - 1 = {C - 1} directions, got M = {M}")
    r = model.rank
    if r < C:
        raise ValueError(f"KDA needs rank >= C = {C}, kernel rank is {r}")
    Ur = model.eigenvectors[:, :r]
    diffs = Ur.T @ ind.E - (Ur.T @ ind.e)[:, None]
    Sb = (diffs * ind.counts) @ diffs.T
    w, V = linalg.eigh(Sb)
    order = np.argsort(-w, kind="stable")[:M]
    V = V[:, order]
    idx = np.argmax(np.abs(V), axis=0)
    V = V * np.sign(V[idx, np.arange(M)])
    return KDAProjector(model, V, w[order])
