"""Kernel functions, kernel matrices and the mean-distance bandwidth rule."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .dataio import Dataset
from .errors import DegenerateSigmaError, NumericError

# Upper bound on the temporary (rows, cols, D) block used for pair sums.
_BLOCK_ELEMS = 1 << 22


@dataclass(frozen=True)
class KernelSpec:
    """``kind`` is ``"gaussian"`` (needs ``sigma``) or ``"linear"``."""

    kind: str = "gaussian"
    sigma: float | None = None

    def __post_init__(self):
        if self.kind == "gaussian":
            if self.sigma is None or not math.isfinite(self.sigma) or self.sigma <= 0:
                raise ValueError(f"gaussian kernel needs a finite sigma > 0, got {self.sigma}")
            object.__setattr__(self, "sigma", float(self.sigma))
        elif self.kind == "linear":
            if self.sigma is not None:
                raise ValueError("linear kernel takes no sigma")
        else:
            raise ValueError(f"unknown kernel kind {self.kind!r}")

    @classmethod
    def gaussian(cls, sigma):
        return cls("gaussian", sigma)

    @classmethod
    def linear(cls):
        return cls("linear")


def _features(data):
    return data.features if isinstance(data, Dataset) else np.atleast_2d(np.asarray(data, dtype=float))


def sigma_heuristic(data) -> float:
    """Mean Euclidean distance over all unordered pairs of distinct rows."""
    X = _features(data)
    if X.shape[0] < 2:
        raise ValueError("sigma heuristic needs at least two samples")
    sigma = float(np.mean(pdist(X)))
    if not sigma > 0:
        raise DegenerateSigmaError("all samples coincide; mean pair-wise distance is 0")
    return sigma


def _pair_values(A, B, spec):
    """Kernel values between every row of A and every row of B, shape (len(A), len(B)).

    Each entry is reduced over the feature axis of a contiguous (D,) slice, so
    the value for a given pair does not depend on how the rows are blocked.
    """
    out = np.empty((A.shape[0], B.shape[0]))
    step = max(1, _BLOCK_ELEMS // max(1, B.shape[0] * A.shape[1]))
    # overflow surfaces as inf and is reported by _check_finite
    with np.errstate(over="ignore", invalid="ignore"):
        for start in range(0, A.shape[0], step):
            a = A[start:start + step, None, :]
            if spec.kind == "gaussian":
                diff = a - B[None, :, :]
                sq = np.square(diff).sum(axis=2)
                out[start:start + step] = np.exp(-sq / (2.0 * spec.sigma ** 2))
            else:
                out[start:start + step] = (a * B[None, :, :]).sum(axis=2)
    return out


def _check_finite(values, what):
    bad = np.argwhere(~np.isfinite(values))
    if bad.size:
        i, j = bad[0]
        raise NumericError(f"non-finite kernel value in {what} at pair ({i}, {j})")


def gram(data, spec: KernelSpec) -> np.ndarray:
    """Kernel matrix of the training rows; each unordered pair evaluated once."""
    X = _features(data)
    N = X.shape[0]
    K = np.empty((N, N))
    # Row block i..i+step only against columns >= i, then mirror.
    step = max(1, _BLOCK_ELEMS // max(1, N * X.shape[1]))
    for start in range(0, N, step):
        stop = min(N, start + step)
        K[start:stop, start:] = _pair_values(X[start:stop], X[start:], spec)
    iu = np.triu_indices(N, 1)
    K[(iu[1], iu[0])] = K[iu]
    _check_finite(K, "gram")
    return K


def cross_gram(train, points, spec: KernelSpec) -> np.ndarray:
    """Kernel vectors of ``points`` (rows) against the training rows, shape (N, T)."""
    X = _features(train)
    P = _features(points)
    if P.shape[1] != X.shape[1]:
        raise ValueError(f"dimension mismatch: training D={X.shape[1]}, points D={P.shape[1]}")
    Kc = _pair_values(X, P, spec)
    _check_finite(Kc, "kernel vectors")
    return Kc


def kernel_vector(train, x, spec: KernelSpec) -> np.ndarray:
    """``k`` with ``k[i] = kappa(x_i, x)`` over the training rows."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("x must be a single D-vector")
    return cross_gram(train, x[None, :], spec)[:, 0]
