"""Synthetic Gaussian blobs and CSV datasets (Iris and Wine are bundled)."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
from importlib import resources
import io
import json
import math
from pathlib import Path

import numpy as np

from .core import DataError, DataMatrix, as_labels

PRNG_ID = "numpy.random.Generator(PCG64)"


@dataclass(frozen=True)
class SyntheticSpec:
    n_samples: int = 500
    n_features: int = 32
    n_clusters: int = 5
    noise_std: float = 1.0
    seed: int = 0
    center_spread: float = 10.0
    base_std: float = 1.0

    def __post_init__(self):
        if self.n_samples < 1 or self.n_features < 1 or self.n_clusters < 1:
            raise ValueError("n_samples, n_features and n_clusters must be >= 1")
        if self.n_clusters > self.n_samples:
            raise ValueError("n_clusters cannot exceed n_samples")
        if self.noise_std < 0 or self.base_std < 0:
            raise ValueError("noise_std and base_std must be >= 0")


# full-scale synthetic configuration used for the published experiments
FULL_SCALE = SyntheticSpec(n_samples=100_000, n_features=1024, n_clusters=5)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    matrix: DataMatrix
    truth: np.ndarray | None
    name: str = "dataset"
    feature_names: tuple[str, ...] = ()
    class_names: tuple[str, ...] = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.truth is not None:
            t = as_labels(self.truth)
            if t.size != self.matrix.n_samples:
                raise DataError(
                    f"{t.size} labels for {self.matrix.n_samples} samples"
                )
            object.__setattr__(self, "truth", t)
        if not self.feature_names:
            names = tuple(f"f{j + 1}" for j in range(self.matrix.n_features))
            object.__setattr__(self, "feature_names", names)

    @property
    def values(self) -> np.ndarray:
        return self.matrix.values


def generate_synthetic(spec: SyntheticSpec) -> LabeledDataset:
    """Gaussian blobs plus additive Gaussian noise, rows shuffled.

    Draw order from one PCG64 stream seeded with ``spec.seed``: cluster
    means (k x d uniform in [-spread, spread]), within-cluster deviations
    (n x d, std ``base_std``), added noise (n x d, std ``noise_std``), then
    the row permutation. Cluster sizes differ by at most one.
    """
    rng = np.random.default_rng(spec.seed)
    n, d, k = spec.n_samples, spec.n_features, spec.n_clusters
    means = rng.uniform(-spec.center_spread, spec.center_spread, size=(k, d))
    sizes = np.full(k, n // k)
    sizes[: n % k] += 1
    truth = np.repeat(np.arange(k), sizes)
    base = rng.standard_normal((n, d)) * spec.base_std
    noise = rng.standard_normal((n, d)) * spec.noise_std
    X = means[truth] + base + noise
    order = rng.permutation(n)
    meta = {"generator": "gaussian-blobs", "prng": PRNG_ID, "spec": asdict(spec)}
    return LabeledDataset(
        DataMatrix(X[order]), truth[order],
        name=f"synthetic-noise{spec.noise_std:g}-seed{spec.seed}", metadata=meta,
    )


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(path, label_column: str | int | None = None, delimiter: str = ",",
             header: bool | None = None, expected_shape: tuple[int, int] | None = None,
             name: str | None = None) -> LabeledDataset:
    """Read a numeric CSV with an optional label column.

    Parameters
    ----------
    label_column : str, int or None
        Column holding class labels, by header name or 0-based index.
        Labels (any text) become dense integers in first-appearance order.
    header : bool or None
        Whether the first row is a header. ``None`` sniffs: the first row is
        a header if any of its feature cells is not a number.
    expected_shape : (n_samples, n_features), optional
        Raise DataError if the parsed matrix has a different shape.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise DataError(f"no such file: {path}") from None
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    return _parse_csv(text, label_column, delimiter, header, expected_shape,
                      name or path.stem)


def _parse_csv(text, label_column, delimiter, header, expected_shape, name):
    rows = [r for r in csv.reader(io.StringIO(text), delimiter=delimiter) if r]
    if not rows:
        raise DataError(f"{name}: empty file")
    width = len(rows[0])
    if isinstance(label_column, str):
        header = True if header is None else header
        if not header:
            raise DataError("a label column given by name needs a header row")
        if label_column not in rows[0]:
            raise DataError(f"{name}: no column named {label_column!r} in header")
        label_idx = rows[0].index(label_column)
    elif label_column is None:
        label_idx = None
    else:
        label_idx = int(label_column) % width
    if header is None:
        header = any(not _is_number(c) for j, c in enumerate(rows[0]) if j != label_idx)
    names = rows[0] if header else None
    body = rows[1:] if header else rows
    start_row = 2 if header else 1

    feat_cols = [j for j in range(width) if j != label_idx]
    values = np.empty((len(body), len(feat_cols)))
    raw_labels = []
    for r, row in enumerate(body):
        if len(row) != width:
            raise DataError(
                f"{name}: row {r + start_row} has {len(row)} cells, expected {width}"
            )
        for c, j in enumerate(feat_cols):
            try:
                v = float(row[j])
            except ValueError:
                raise DataError(
                    f"{name}: cannot parse {row[j]!r} at row {r + start_row}, column {j + 1}"
                ) from None
            if not math.isfinite(v):
                raise DataError(
                    f"{name}: non-finite value at row {r + start_row}, column {j + 1}"
                )
            values[r, c] = v
        if label_idx is not None:
            raw_labels.append(row[label_idx].strip())
    if values.shape[0] == 0:
        raise DataError(f"{name}: no data rows")
    if expected_shape is not None and tuple(values.shape) != tuple(expected_shape):
        raise DataError(f"{name}: shape {values.shape}, expected {tuple(expected_shape)}")

    truth = None
    class_names = ()
    if label_idx is not None:
        mapping: dict[str, int] = {}
        for lab in raw_labels:
            mapping.setdefault(lab, len(mapping))
        truth = np.array([mapping[lab] for lab in raw_labels], dtype=np.int64)
        class_names = tuple(mapping)
    feature_names = tuple(names[j] for j in feat_cols) if names else ()
    return LabeledDataset(DataMatrix(values), truth, name=name,
                          feature_names=feature_names, class_names=class_names)


def write_csv(ds: LabeledDataset, path, delimiter: str = ",") -> Path:
    """Header row, features with ``repr`` precision, then a ``label`` column."""
    path = Path(path)
    out = io.StringIO()
    w = csv.writer(out, delimiter=delimiter, lineterminator="\n")
    cols = list(ds.feature_names)
    if ds.truth is not None:
        cols.append("label")
    w.writerow(cols)
    for i, row in enumerate(ds.values):
        cells = [repr(float(v)) for v in row]
        if ds.truth is not None:
            cells.append(str(int(ds.truth[i])))
        w.writerow(cells)
    path.write_text(out.getvalue())
    return path


def metadata_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".meta.json")


def write_metadata(ds: LabeledDataset, csv_path) -> Path:
    meta = dict(ds.metadata)
    meta.update(name=ds.name, n_samples=ds.matrix.n_samples,
                n_features=ds.matrix.n_features,
                label_column="label" if ds.truth is not None else None)
    p = metadata_path(csv_path)
    p.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return p


def _bundled(filename: str, expected_shape, name) -> LabeledDataset:
    text = resources.files("lsc").joinpath("datasets").joinpath(filename).read_text()
    ds = _parse_csv(text, "class", ",", True, expected_shape, name)
    meta = {"source": "UCI Machine Learning Repository", "file": filename}
    return LabeledDataset(ds.matrix, ds.truth, name, ds.feature_names, ds.class_names, meta)


def load_iris() -> LabeledDataset:
    """150 x 4, three species of 50."""
    return _bundled("iris.csv", (150, 4), "iris")


def load_wine() -> LabeledDataset:
    """178 x 13, three cultivars."""
    return _bundled("wine.csv", (178, 13), "wine")


BUNDLED = {"iris": load_iris, "wine": load_wine}


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("lsc").joinpath("datasets").joinpath(f"{name}.csv")))


def labels_text(labels) -> str:
    """Labels file body: a ``label`` header then one integer per row."""
    lab = np.asarray(labels, dtype=np.int64).ravel()
    return "label\n" + "".join(f"{int(v)}\n" for v in lab)


def write_labels(labels, path) -> Path:
    path = Path(path)
    path.write_text(labels_text(labels))
    return path


def read_labels(path, column: str | int | None = None) -> np.ndarray:
    """Read one label column from a CSV.

    With ``column=None`` the file may be a bare labels file (one column,
    optional header) or a dataset whose header has a ``label`` or ``class``
    column.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise DataError(f"{path}: empty file")
    first = [c.strip() for c in rows[0]]
    has_header = not all(_is_int(c) for c in first)
    if column is None:
        if len(first) == 1:
            column = 0
        else:
            for cand in ("label", "class"):
                if cand in first:
                    column = cand
                    break
            else:
                raise DataError(f"{path}: no 'label' or 'class' column; pass the column")
    if isinstance(column, str):
        if not has_header or column not in first:
            raise DataError(f"{path}: no column named {column!r}")
        idx = first.index(column)
    else:
        idx = int(column)
    body = rows[1:] if has_header else rows
    raw = []
    for r, row in enumerate(body, 2 if has_header else 1):
        if idx >= len(row):
            raise DataError(f"{path}: row {r} has no column {idx + 1}")
        raw.append(row[idx].strip())
    if all(_is_int(v) for v in raw):
        return np.array([int(v) for v in raw], dtype=np.int64)
    mapping: dict[str, int] = {}
    return np.array([mapping.setdefault(v, len(mapping)) for v in raw], dtype=np.int64)


def _is_int(cell: str) -> bool:
    try:
        int(cell)
    except ValueError:
        return False
    return True
