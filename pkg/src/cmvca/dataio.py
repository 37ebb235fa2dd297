"""Labeled datasets: CSV I/O, synthetic blobs and stratified splits.

CSV layout is ``f_1,...,f_D,label`` per row, comma separated, '.' decimal
point, no quoting. Labels are remapped to a dense ``0..C-1`` range in order of
first appearance; the original label values are kept in ``Dataset.label_map``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError, EmptyInputError, ParseError, StratificationError


def _readonly(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Feature vectors (rows) with dense integer class labels.

    Parameters
    ----------
    features : ndarray, shape (N, D)
    labels : ndarray of int, shape (N,)
        Values in ``0..C-1``; every class must be present.
    label_map : tuple, optional
        Original label value of each dense class id. Defaults to ``0..C-1``.
    row_ids : ndarray of int, optional
        Identity of each row in the dataset it was derived from. Defaults to
        ``0..N-1``; ``split`` propagates the parent ids.
    """

    features: np.ndarray
    labels: np.ndarray
    label_map: tuple = None
    row_ids: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        if X.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {X.shape}")
        y = np.asarray(self.labels)
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DataError("labels must be a vector with one entry per feature row")
        if X.shape[0] == 0:
            raise EmptyInputError("dataset has no rows")
        if not np.issubdtype(y.dtype, np.integer):
            if not np.all(np.equal(np.mod(y, 1), 0)):
                raise DataError("labels must be integers")
        y = y.astype(np.int64)
        if not np.all(np.isfinite(X)):
            raise DataError("features contain non-finite values")

        label_map = self.label_map
        if label_map is None:
            label_map = tuple(range(int(y.max()) + 1))
        label_map = tuple(label_map)
        C = len(label_map)
        if y.min() < 0 or y.max() >= C:
            raise DataError(f"labels must lie in 0..{C - 1}")
        missing = np.setdiff1d(np.arange(C), y)
        if missing.size:
            raise DataError(f"classes without samples: {missing.tolist()}")

        row_ids = self.row_ids
        if row_ids is None:
            row_ids = np.arange(X.shape[0])
        row_ids = np.asarray(row_ids, dtype=np.int64)
        if row_ids.shape != y.shape:
            raise DataError("row_ids must have one entry per row")

        object.__setattr__(self, "features", _readonly(X))
        object.__setattr__(self, "labels", _readonly(y))
        object.__setattr__(self, "label_map", label_map)
        object.__setattr__(self, "row_ids", _readonly(row_ids))

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.label_map)

    @property
    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)

    @property
    def class_priors(self) -> np.ndarray:
        return self.class_counts / self.n_samples

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(
            self.features[rows], self.labels[rows], self.label_map, self.row_ids[rows]
        )


def _parse_label(text, line):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"non-numeric label {text!r}", line) from None
    if not math.isfinite(value) or not value.is_integer():
        raise ParseError(f"label {text!r} is not an integer", line)
    return int(value)


def load_csv(path, has_header: bool = False) -> Dataset:
    """Read a labeled CSV file (label in the last column)."""
    path = Path(path)
    rows = []
    raw_labels = []
    n_fields = None
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if has_header and lineno == 1:
                continue
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if n_fields is None:
                n_fields = len(parts)
                if n_fields < 2:
                    raise ParseError("need at least one feature and a label", lineno)
            elif len(parts) != n_fields:
                raise ParseError(
                    f"expected {n_fields} fields, found {len(parts)}", lineno
                )
            try:
                values = [float(p) for p in parts[:-1]]
            except ValueError:
                raise ParseError(f"non-numeric feature in {line!r}", lineno) from None
            if not all(math.isfinite(v) for v in values):
                raise ParseError("non-finite feature value", lineno)
            rows.append(values)
            raw_labels.append(_parse_label(parts[-1].strip(), lineno))
    if not rows:
        raise EmptyInputError(f"{path}: no data rows")

    dense = {}
    labels = np.empty(len(raw_labels), dtype=np.int64)
    for i, lab in enumerate(raw_labels):
        labels[i] = dense.setdefault(lab, len(dense))
    return Dataset(np.array(rows, dtype=float), labels, tuple(dense))


def write_csv(ds: Dataset, path, original_labels: bool = True) -> None:
    """Write ``ds`` in the format read by :func:`load_csv` (round-trip exact)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for x, y in zip(ds.features, ds.labels):
            lab = ds.label_map[y] if original_labels else int(y)
            fh.write(",".join(repr(float(v)) for v in x))
            fh.write(f",{lab}\n")


def make_blobs(
    n_per_class: Sequence[int],
    means: Sequence[Sequence[float]],
    stddev: float,
    seed: int,
) -> Dataset:
    """Isotropic Gaussian blobs, one per class, rows grouped by class."""
    if not stddev > 0 or not math.isfinite(stddev):
        raise ValueError(f"stddev must be positive and finite, got {stddev}")
    means = np.atleast_2d(np.asarray(means, dtype=float))
    if means.shape[0] == 0:
        raise ValueError("need at least one class mean")
    counts = [int(n) for n in n_per_class]
    if len(counts) != means.shape[0]:
        raise ValueError("n_per_class and means must have the same length")
    if any(n <= 0 for n in counts):
        raise ValueError("class counts must be positive")

    rng = np.random.default_rng(seed)
    blocks = [mu + stddev * rng.standard_normal((n, means.shape[1])) for n, mu in zip(counts, means)]
    labels = np.repeat(np.arange(len(counts)), counts)
    return Dataset(np.vstack(blocks), labels)


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def split(ds: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Stratified random train/test split.

    Each class sends ``round_half_up(train_fraction * N_c)`` samples to the
    training set, clipped to ``[1, N_c - 1]`` so that both partitions keep
    every class. Row order inside each partition follows the parent order.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    counts = ds.class_counts
    if np.any(counts < 2):
        bad = np.flatnonzero(counts < 2).tolist()
        raise StratificationError(f"classes {bad} have fewer than 2 samples")

    rng = np.random.default_rng(seed)
    train_rows = []
    for c in range(ds.n_classes):
        members = np.flatnonzero(ds.labels == c)
        n_train = min(max(_round_half_up(train_fraction * members.size), 1), members.size - 1)
        train_rows.append(rng.permutation(members)[:n_train])
    train_rows = np.sort(np.concatenate(train_rows))
    mask = np.zeros(ds.n_samples, dtype=bool)
    mask[train_rows] = True
    return ds.subset(train_rows), ds.subset(np.flatnonzero(~mask))
