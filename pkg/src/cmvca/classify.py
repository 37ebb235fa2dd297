"""Nearest class centroid classification in a learned subspace."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CentroidModel:
    centroids: np.ndarray  # (M, C), one column per class
    classes: np.ndarray

    @property
    def n_components(self) -> int:
        return self.centroids.shape[0]


def fit_centroids(train_embedding, labels, n_classes=None) -> CentroidModel:
    """Class means of the training columns of an (M, N) embedding."""
    Y = np.atleast_2d(np.asarray(train_embedding, dtype=float))
    labels = np.asarray(labels, dtype=np.int64)
    if Y.shape[1] != labels.size:
        raise ValueError(f"{Y.shape[1]} embedded samples but {labels.size} labels")
    if n_classes is None:
        n_classes = int(labels.max()) + 1
    counts = np.bincount(labels, minlength=n_classes)
    if np.any(counts == 0):
        raise ValueError(f"classes without training samples: {np.flatnonzero(counts == 0).tolist()}")
    centroids = np.column_stack([Y[:, labels == c].mean(axis=1) for c in range(n_classes)])
    return CentroidModel(centroids, np.arange(n_classes))


def predict(model: CentroidModel, points) -> np.ndarray:
    """Label of the nearest centroid for each column of ``points`` (M, T).

    Exact distance ties go to the smallest class id.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.shape[0] != model.n_components:
        raise ValueError(f"points have dimension {P.shape[0]}, centroids {model.n_components}")
    dist = np.empty((model.centroids.shape[1], P.shape[1]))
    for c in range(model.centroids.shape[1]):
        dist[c] = np.sum((P - model.centroids[:, c:c + 1]) ** 2, axis=0)
    return model.classes[np.argmin(dist, axis=0)]


def accuracy(pred, truth) -> float:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.size == 0:
        raise ValueError("predictions and ground truth must be non-empty and aligned")
    return float(np.mean(pred == truth))
