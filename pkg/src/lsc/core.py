"""Shared domain types and the line-space view of a data matrix.

A sample ``x_i`` with ``d`` features is read as the ordered sequence
``(1, x_i1), (2, x_i2), ..., (d, x_id)``. Feature indices are 1-based in
everything a person reads (serialized output, ``LineSeries.points``);
arrays are 0-based internally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class DataError(ValueError):
    """Input data is malformed: wrong shape, non-finite, unparseable."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """n x d float64 table; rows are samples, columns are features."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.ndim == 1:
            v = v.reshape(1, -1)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise DataError(f"expected a non-empty 2-D matrix, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            bad = np.argwhere(~np.isfinite(v))[0]
            raise DataError(
                f"non-finite value at row {bad[0] + 1}, column {bad[1] + 1}"
            )
        object.__setattr__(self, "values", _frozen(v))

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __eq__(self, other):
        if not isinstance(other, DataMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.values, other.values)


@dataclass(frozen=True, eq=False)
class LineSeries:
    """One sample seen as a sequence over feature indices 1..d."""

    index: int
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True).ravel()
        if v.size < 1:
            raise DataError("a line needs at least one point")
        object.__setattr__(self, "values", _frozen(v))

    def __len__(self):
        return self.values.size

    @property
    def feature_indices(self) -> np.ndarray:
        return np.arange(1, self.values.size + 1)

    @property
    def points(self) -> list[tuple[int, float]]:
        return [(j + 1, float(v)) for j, v in enumerate(self.values)]

    def with_values(self, values) -> "LineSeries":
        return LineSeries(self.index, values)


def as_labels(labels, n_clusters: int | None = None) -> np.ndarray:
    """Validate a label vector: 1-D, non-negative integers.

    If ``n_clusters`` is given, every label must be below it.
    """
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise DataError(f"labels must be 1-D, got shape {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        as_int = arr.astype(np.int64)
        if not np.array_equal(as_int, arr):
            raise DataError("labels must be integers")
        arr = as_int
    arr = arr.astype(np.int64, copy=True)
    if arr.size and arr.min() < 0:
        raise DataError("labels must be non-negative")
    if n_clusters is not None and arr.size and arr.max() >= n_clusters:
        raise DataError(f"label {arr.max()} out of range for {n_clusters} clusters")
    return _frozen(arr)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    center_shift: float  # max over clusters, combined-distance units
    label_changes: int
    timestamp: float


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """Fitted centers, labels and loop bookkeeping.

    ``centers`` is a (k, d) array in the space the algorithm clustered in
    (standardized and smoothed for LSC). ``timings`` maps phase name to
    seconds.
    """

    centers: np.ndarray
    labels: np.ndarray
    iterations_run: int
    converged: bool
    trace: tuple[IterationRecord, ...] = ()
    timings: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.array(self.centers, dtype=np.float64, copy=True)
        object.__setattr__(self, "centers", _frozen(c))
        object.__setattr__(self, "labels", as_labels(self.labels, c.shape[0]))
        object.__setattr__(self, "trace", tuple(self.trace))

    @property
    def k(self) -> int:
        return self.centers.shape[0]

    @property
    def center_lines(self) -> list[LineSeries]:
        return [LineSeries(j, c) for j, c in enumerate(self.centers)]


def to_line_space(m: DataMatrix) -> list[LineSeries]:
    """Each row of ``m`` becomes a LineSeries carrying ``(j, m[i][j])``."""
    return [LineSeries(i, row) for i, row in enumerate(m.values)]


def to_matrix(lines: Sequence[LineSeries] | Iterable[LineSeries]) -> DataMatrix:
    lines = sorted(lines, key=lambda line: line.index)
    if not lines:
        raise DataError("no lines given")
    lengths = {len(line) for line in lines}
    if len(lengths) != 1:
        raise DataError(f"lines have unequal lengths {sorted(lengths)}")
    return DataMatrix(np.vstack([line.values for line in lines]))


def lines_to_array(lines: Sequence[LineSeries]) -> np.ndarray:
    """Stack lines (in given order) into an (n, d) array, checking lengths."""
    lengths = {len(line) for line in lines}
    if len(lengths) > 1:
        raise DataError(f"lines have unequal lengths {sorted(lengths)}")
    if not lines:
        return np.empty((0, 0))
    return np.vstack([line.values for line in lines])
