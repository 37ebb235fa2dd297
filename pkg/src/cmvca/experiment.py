"""Accuracy and Rayleigh-quotient curves over subspace dimensionality.

One run fits every method on a training split, maps training and test data
into the ordered subspace of each method, and for every requested ``M``
classifies the test data with nearest class centroids computed from the first
``M`` training coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .approx import nystrom, rff, subspace_from_features
from .classify import accuracy, fit_centroids, predict
from .cmvda import (
    cmvda_embed_test,
    cmvda_embed_train,
    cmvda_r_basis,
    indicator_basis,
    whiten,
    whitened_basis,
)
from .components import class_indicators, kda_baseline, ranking, score_components
from .dataio import Dataset
from .kernels import KernelSpec, cross_gram, gram, sigma_heuristic
from .spectral import DEFAULT_RANK_TOL, decompose, embed_training, project

METHODS = ("kpca", "keca", "cmvca", "rayleigh", "kda", "cmvda", "cmvda_r")
KERNEL_MODES = ("exact", "nystrom", "rff")
EIGEN_METHODS = ("kpca", "keca", "cmvca", "rayleigh")


def rayleigh_curve(Y, labels, n_classes=None) -> np.ndarray:
    """Trace-ratio ``Tr(S_b) / Tr(S_T)`` of the first ``M`` rows of ``Y``, for every ``M``.

    ``Y`` is (M_max, N) with samples as columns; scatter matrices are centered
    on the total mean, and ``S_b`` weights each class by its size.
    """
    ind = class_indicators(labels, n_classes)
    total = Y @ ind.e
    between = (((Y @ ind.E) - total[:, None]) ** 2) @ ind.counts.astype(float)
    scatter = np.sum((Y - total[:, None]) ** 2, axis=1)
    num = np.cumsum(between)
    den = np.cumsum(scatter)
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den > 0)
    return out


@dataclass
class SeedResult:
    seed: int
    sigma: float | None
    rank: int
    n_train: int
    n_test: int
    accuracy: dict = field(default_factory=dict)  # method -> {M: acc}
    rayleigh: dict = field(default_factory=dict)  # method -> {M: quotient}
    skipped: dict = field(default_factory=dict)  # method -> [M, ...]
    notes: dict = field(default_factory=dict)


def _kernel_model(train, test, mode, sigma, approx_n, seed, rank_tol):
    if mode == "exact":
        spec = KernelSpec.gaussian(sigma)
        model = decompose(gram(train, spec), rank_tol)
        return model, cross_gram(train, test, spec), {}
    if mode == "nystrom":
        n = min(approx_n, train.n_samples)
        feat = nystrom(train, KernelSpec.gaussian(sigma), n, seed, rank_tol)
        info = {"approx_n": n, "reference_rank": feat.meta["reference_rank"]}
    elif mode == "rff":
        feat = rff(train, sigma, approx_n, seed)
        info = {"approx_n": approx_n}
    else:
        raise ValueError(f"unknown kernel mode {mode!r}")
    return subspace_from_features(feat, rank_tol), feat.kernel_vectors(test.features), info


def _ncc_curve(Ytr, Yte, train, test, grid):
    out = {}
    for M in grid:
        cm = fit_centroids(Ytr[:M], train.labels, train.n_classes)
        out[M] = accuracy(predict(cm, Yte[:M]), test.labels)
    return out


def run_seed(
    train: Dataset,
    test: Dataset,
    seed: int,
    methods=METHODS,
    mode: str = "exact",
    sigma=None,
    approx_n: int = 1000,
    m_grid=None,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> SeedResult:
    """Fit every method on ``train`` and evaluate on ``test``.

    ``sigma=None`` uses the mean pair-wise training distance. ``m_grid=None``
    evaluates ``M = 1..rank``; values a method cannot provide are skipped and
    listed in ``SeedResult.skipped``.
    """
    if sigma is None:
        sigma = sigma_heuristic(train)
    model, K_cols, info = _kernel_model(train, test, mode, sigma, approx_n, seed, rank_tol)
    r = model.rank
    C = train.n_classes
    N = train.n_samples
    grid = list(range(1, r + 1)) if m_grid is None else sorted(set(int(m) for m in m_grid))
    res = SeedResult(seed, float(sigma), r, N, test.n_samples, notes=dict(info))
    ind = class_indicators(train.labels, C)

    def record(method, Ytr, Yte, limit, white=None):
        ok = [M for M in grid if 1 <= M <= limit]
        skipped = [M for M in grid if not 1 <= M <= limit]
        if skipped:
            res.skipped[method] = skipped
        if not ok:
            return
        top = max(ok)
        res.accuracy[method] = _ncc_curve(Ytr[:top], Yte[:top], train, test, ok)
        curve = rayleigh_curve((Ytr if white is None else white)[:top], train.labels, C)
        res.rayleigh[method] = {M: float(curve[M - 1]) for M in ok}

    if any(m in EIGEN_METHODS for m in methods):
        scores = score_components(model, ind)
        emb = embed_training(model)
        for method in EIGEN_METHODS:
            if method not in methods:
                continue
            order = ranking(scores, method)
            Ytr = emb[order]
            # trace ratio measured on whitened coordinates
            white = Ytr / np.sqrt(model.eigenvalues[order])[:, None]
            record(method, Ytr, project(model, K_cols, order), r, white)

    if "kda" in methods:
        if C < 2 or r < C:
            res.skipped["kda"] = list(grid)
        else:
            kda = kda_baseline(model, ind, C - 1)
            record("kda", kda.training_embedding(), kda.transform(K_cols), C - 1)

    want_cmvda = [m for m in ("cmvda", "cmvda_r") if m in methods]
    if want_cmvda:
        wm = whiten(model)
        top = min(r, max(grid, default=0))
        res.notes["cmvda_rank_deficient"] = not wm.full_rank
        for method in want_cmvda:
            if top < 1:
                res.skipped[method] = list(grid)
                continue
            if method == "cmvda":
                basis = indicator_basis(ind)
            else:
                basis = cmvda_r_basis(N, ind.e, seed)
            basis = whitened_basis(wm, basis)
            Ytr = cmvda_embed_train(train, top, basis=basis)
            Yte = cmvda_embed_test(wm, basis, K_cols, top)
            record(method, Ytr, Yte, r)
    return res
