"""Dataset ingestion, normalization, and stratified fold splitting.

Loaders produce LabeledDataset values with dense integer labels. Delimited
text files may carry symbolic labels; these are re-indexed densely in first
appearance order so results are stable for a given file. IDX image/label
pairs follow the standard big-endian MNIST layout and may be gzip-compressed.
"""

from __future__ import annotations

import csv
import gzip
import os
import struct
import warnings
from dataclasses import dataclass
from importlib import resources

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import as_float_matrix, as_label_vector, check_fitted, check_same_length
from .exceptions import DataFormatError
from .rng import SeededStream

__all__ = [
    "LabeledSample",
    "LabeledDataset",
    "load_delimited",
    "load_idx",
    "NormalizationParams",
    "fit_normalizer",
    "apply_normalizer",
    "ZScoreScaler",
    "FoldPlan",
    "stratified_folds",
    "BUILTIN_DATASETS",
    "load_builtin",
    "load_iris",
    "load_wine",
    "load_balance",
    "load_mnist",
    "load_thyroid",
]

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


@dataclass(frozen=True)
class LabeledSample:
    features: np.ndarray
    label: int


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix with dense integer class labels.

    Invariants checked on construction: all features finite, labels cover a
    dense range [0, K) with every class represented at least once.
    """

    X: np.ndarray
    y: np.ndarray
    name: str = "dataset"
    class_names: tuple = ()

    def __post_init__(self):
        X = as_float_matrix(self.X, "features")
        y = as_label_vector(self.y, "labels")
        check_same_length(X, y, ("features", "labels"))
        if len(X) == 0:
            raise ValueError("dataset is empty")
        k = int(y.max()) + 1 if len(y) else 0
        if y.min() < 0:
            raise ValueError("labels must be non-negative")
        counts = np.bincount(y, minlength=k)
        if (counts == 0).any():
            missing = int(np.where(counts == 0)[0][0])
            raise ValueError(f"class {missing} has no samples; labels must be dense")
        names = self.class_names or tuple(str(c) for c in range(k))
        if len(names) != k:
            raise ValueError(f"got {len(names)} class names for {k} classes")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "class_names", tuple(str(n) for n in names))

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def sample(self, i: int) -> LabeledSample:
        return LabeledSample(self.X[i].copy(), int(self.y[i]))

    def subset(self, indices, name: str | None = None) -> "LabeledDataset":
        """Row subset; class set must survive (every class keeps >= 1 sample)."""
        idx = np.asarray(indices)
        return LabeledDataset(self.X[idx], self.y[idx], name or self.name, self.class_names)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.n_classes)


# ---------------------------------------------------------------------------
# delimited text


def load_delimited(path, label_col=-1, delimiter=",", header=False, name=None) -> LabeledDataset:
    """Load a delimited text file of feature columns plus one label column.

    label_col may be a column index (negative allowed) or, when header is
    true, a column name. Labels are mapped to dense indices in first
    appearance order. Parse failures name the offending row and column.
    """
    path = os.fspath(path)
    with open(path, newline="", encoding="utf-8") as f:
        rows = [row for row in csv.reader(f, delimiter=delimiter) if row]
    if not rows:
        raise DataFormatError(f"{path}: file holds no rows")

    columns = None
    if header:
        columns = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise DataFormatError(f"{path}: only a header row present")

    width = len(rows[0])
    if width < 2:
        raise DataFormatError(f"{path}: need at least one feature column and a label column")

    if isinstance(label_col, str):
        if columns is None:
            raise DataFormatError(f"{path}: label column given by name but file has no header")
        try:
            label_idx = columns.index(label_col)
        except ValueError:
            raise DataFormatError(f"{path}: no column named {label_col!r}") from None
    else:
        label_idx = int(label_col)
        if label_idx < 0:
            label_idx += width
        if not (0 <= label_idx < width):
            raise DataFormatError(f"{path}: label column {label_col} outside {width} columns")

    feature_idx = [c for c in range(width) if c != label_idx]
    features = np.empty((len(rows), len(feature_idx)))
    raw_labels = []
    first_data_row = 2 if header else 1
    for r, row in enumerate(rows):
        if len(row) != width:
            raise DataFormatError(
                f"{path}: row {r + first_data_row} has {len(row)} cells, expected {width}"
            )
        for out_c, c in enumerate(feature_idx):
            cell = row[c].strip()
            try:
                value = float(cell)
            except ValueError:
                raise DataFormatError(
                    f"{path}: row {r + first_data_row}, column {c + 1}: "
                    f"could not parse {cell!r} as a number"
                ) from None
            if not np.isfinite(value):
                raise DataFormatError(
                    f"{path}: row {r + first_data_row}, column {c + 1}: non-finite value {cell!r}"
                )
            features[r, out_c] = value
        raw_labels.append(row[label_idx].strip())

    seen: dict[str, int] = {}
    y = np.array([seen.setdefault(lab, len(seen)) for lab in raw_labels], dtype=np.int64)
    class_names = tuple(seen)  # insertion order == first appearance
    if name is None:
        name = os.path.splitext(os.path.basename(path))[0]
    return LabeledDataset(features, y, name=name, class_names=class_names)


# ---------------------------------------------------------------------------
# IDX binary (MNIST layout)


def _open_maybe_gzip(path):
    with open(path, "rb") as f:
        magic2 = f.read(2)
    if magic2 == b"\x1f\x8b":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_be_u32(f, path, what):
    data = f.read(4)
    if len(data) != 4:
        raise DataFormatError(f"{path}: truncated while reading {what}")
    return struct.unpack(">I", data)[0]


def load_idx(images_path, labels_path, limit=None, seed=0, name=None) -> LabeledDataset:
    """Load an IDX image/label file pair, scaling pixels to [0, 1].

    With limit set, a seeded stratified subsample of exactly that many rows
    is taken (proportional per class, largest remainder). Files may be plain
    or gzip-compressed.
    """
    images_path = os.fspath(images_path)
    labels_path = os.fspath(labels_path)

    with _open_maybe_gzip(images_path) as f:
        magic = _read_be_u32(f, images_path, "magic")
        if magic != IDX_IMAGE_MAGIC:
            raise DataFormatError(
                f"{images_path}: bad image magic 0x{magic:08x}, expected 0x{IDX_IMAGE_MAGIC:08x}"
            )
        n = _read_be_u32(f, images_path, "item count")
        rows = _read_be_u32(f, images_path, "row count")
        cols = _read_be_u32(f, images_path, "column count")
        pixel_bytes = f.read(n * rows * cols)
        if len(pixel_bytes) != n * rows * cols:
            raise DataFormatError(f"{images_path}: truncated pixel data")

    with _open_maybe_gzip(labels_path) as f:
        magic = _read_be_u32(f, labels_path, "magic")
        if magic != IDX_LABEL_MAGIC:
            raise DataFormatError(
                f"{labels_path}: bad label magic 0x{magic:08x}, expected 0x{IDX_LABEL_MAGIC:08x}"
            )
        n_labels = _read_be_u32(f, labels_path, "item count")
        label_bytes = f.read(n_labels)
        if len(label_bytes) != n_labels:
            raise DataFormatError(f"{labels_path}: truncated label data")

    if n != n_labels:
        raise DataFormatError(
            f"image file holds {n} items but label file holds {n_labels}"
        )

    X = np.frombuffer(pixel_bytes, dtype=np.uint8).reshape(n, rows * cols) / 255.0
    raw = np.frombuffer(label_bytes, dtype=np.uint8).astype(np.int64)
    values = np.unique(raw)
    y = np.searchsorted(values, raw)
    class_names = tuple(str(v) for v in values)
    if name is None:
        name = os.path.splitext(os.path.basename(images_path))[0]

    ds = LabeledDataset(X, y, name=name, class_names=class_names)
    if limit is not None:
        ds = _stratified_subsample(ds, int(limit), seed)
    return ds


def _stratified_subsample(ds: LabeledDataset, limit: int, seed: int) -> LabeledDataset:
    if not (0 < limit <= ds.n_samples):
        raise ValueError(f"limit {limit} outside (0, {ds.n_samples}]")
    if limit == ds.n_samples:
        return ds
    counts = ds.class_counts()
    exact = counts * (limit / ds.n_samples)
    quota = np.floor(exact).astype(int)
    remainder = limit - quota.sum()
    for c in np.argsort(-(exact - quota), kind="stable")[:remainder]:
        quota[c] += 1
    stream = SeededStream(seed)
    keep = []
    for c in range(ds.n_classes):
        idx = np.flatnonzero(ds.y == c)
        order = stream.substream(c).permutation(len(idx))
        keep.append(idx[order[: quota[c]]])
    keep = np.sort(np.concatenate(keep))
    return ds.subset(keep)


# ---------------------------------------------------------------------------
# normalization


@dataclass(frozen=True)
class NormalizationParams:
    """Per-feature z-score parameters learned from training data only.

    Zero-variance features are flagged inactive and map to exactly 0.
    """

    mean: np.ndarray
    scale: np.ndarray
    active: np.ndarray  # bool per feature

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = as_float_matrix(X)
        if X.shape[1] != len(self.mean):
            raise ValueError(f"got {X.shape[1]} features, normalizer has {len(self.mean)}")
        out = (X - self.mean) / self.scale
        out[:, ~self.active] = 0.0
        return out


def fit_normalizer(train: LabeledDataset | np.ndarray) -> NormalizationParams:
    X = train.X if isinstance(train, LabeledDataset) else as_float_matrix(train)
    if len(X) == 0:
        raise ValueError("cannot fit a normalizer on an empty matrix")
    mean = X.mean(axis=0)
    sd = X.std(axis=0)  # population convention
    active = sd > 0
    scale = np.where(active, sd, 1.0)
    return NormalizationParams(mean=mean, scale=scale, active=active)


def apply_normalizer(params: NormalizationParams, samples):
    """Apply training statistics; accepts a dataset or a bare matrix."""
    if isinstance(samples, LabeledDataset):
        return LabeledDataset(
            params.apply(samples.X), samples.y, samples.name, samples.class_names
        )
    return params.apply(samples)


class ZScoreScaler(TransformerMixin, BaseEstimator):
    """Estimator facade over fit_normalizer/apply_normalizer."""

    def __init__(self):
        self.params_ = None

    def fit(self, X, y=None):
        self.params_ = fit_normalizer(X)
        return self

    def transform(self, X):
        check_fitted(self, "params_")
        return self.params_.apply(as_float_matrix(X))


# ---------------------------------------------------------------------------
# folds


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of every sample index to one fold in [0, n_folds)."""

    assignments: np.ndarray
    n_folds: int

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=np.int64)
        if a.ndim != 1 or len(a) == 0:
            raise ValueError("assignments must be a non-empty 1-D array")
        if a.min() < 0 or a.max() >= self.n_folds:
            raise ValueError("fold ids outside [0, n_folds)")
        object.__setattr__(self, "assignments", a)

    @property
    def n_samples(self) -> int:
        return len(self.assignments)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


def stratified_folds(dataset: LabeledDataset, n_folds: int, seed: int = 0) -> FoldPlan:
    """Deterministic stratified folds: per-class counts across folds differ by
    at most one. Classes smaller than n_folds degrade to best effort with a
    warning."""
    if n_folds < 2:
        raise ValueError(f"need at least 2 folds, got {n_folds}")
    if n_folds > dataset.n_samples:
        raise ValueError(
            f"cannot split {dataset.n_samples} samples into {n_folds} folds"
        )
    small = [c for c, cnt in enumerate(dataset.class_counts()) if cnt < n_folds]
    if small:
        warnings.warn(
            f"classes {small} have fewer than {n_folds} samples; "
            "some folds will miss them",
            stacklevel=2,
        )
    stream = SeededStream(seed)
    assignments = np.empty(dataset.n_samples, dtype=np.int64)
    offset = 0
    for c in range(dataset.n_classes):
        idx = np.flatnonzero(dataset.y == c)
        order = stream.substream(c).permutation(len(idx))
        for i, s in enumerate(idx[order]):
            assignments[s] = (offset + i) % n_folds
        offset += len(idx)
    return FoldPlan(assignments=assignments, n_folds=n_folds)


# ---------------------------------------------------------------------------
# bundled datasets

BUILTIN_DATASETS = ("iris", "wine", "balance", "mnist", "thyroid")

_SHAPES = {
    "iris": (4, 3, 150),
    "wine": (13, 3, 178),
    "balance": (4, 3, 625),
    "thyroid": (5, 3, 215),
}


def _data_path(filename: str):
    return resources.files("rrbf").joinpath("data", filename)


def _load_bundled_csv(stem: str) -> LabeledDataset:
    path = _data_path(f"{stem}.csv")
    if not path.is_file():
        raise DataFormatError(f"bundled dataset file {stem}.csv is missing")
    ds = load_delimited(str(path), label_col="class", header=True, name=stem)
    d, k, n = _SHAPES[stem]
    if (ds.n_features, ds.n_classes, ds.n_samples) != (d, k, n):
        raise DataFormatError(
            f"bundled {stem} has shape ({ds.n_features}, {ds.n_classes}, {ds.n_samples}), "
            f"expected ({d}, {k}, {n})"
        )
    return ds


def load_iris() -> LabeledDataset:
    return _load_bundled_csv("iris")


def load_wine() -> LabeledDataset:
    return _load_bundled_csv("wine")


def load_balance() -> LabeledDataset:
    return _load_bundled_csv("balance")


def load_thyroid(path=None) -> LabeledDataset:
    """Thyroid screening data (215 samples, 5 features, 3 classes).

    Not redistributed with the package; supply the standard comma-delimited
    file (class in the first column) via `path`, the RRBF_THYROID_FILE
    environment variable, or by dropping thyroid.csv into the package data
    directory.
    """
    if path is None:
        path = os.environ.get("RRBF_THYROID_FILE")
    if path is None:
        bundled = _data_path("thyroid.csv")
        if bundled.is_file():
            return _load_bundled_csv("thyroid")
        raise FileNotFoundError(
            "thyroid data not found; pass path=, set RRBF_THYROID_FILE, or place "
            "thyroid.csv in the package data directory (see README)"
        )
    ds = load_delimited(path, label_col=0, header=False, name="thyroid")
    d, k, n = _SHAPES["thyroid"]
    if (ds.n_features, ds.n_classes, ds.n_samples) != (d, k, n):
        raise DataFormatError(
            f"thyroid file has shape ({ds.n_features}, {ds.n_classes}, {ds.n_samples}), "
            f"expected ({d}, {k}, {n})"
        )
    return ds


def load_mnist(limit=None, seed=0) -> LabeledDataset:
    """Bundled subset of the MNIST handwriting set (10000 digits, 28x28).

    limit takes a seeded stratified subsample, e.g. limit=2499 for the
    desk-scale benchmark subset.
    """
    images = _data_path("mnist-images.idx3-ubyte.gz")
    labels = _data_path("mnist-labels.idx1-ubyte.gz")
    if not (images.is_file() and labels.is_file()):
        raise FileNotFoundError("bundled MNIST files are missing")
    return load_idx(str(images), str(labels), limit=limit, seed=seed, name="mnist")


def load_builtin(name: str, limit=None, seed=0) -> LabeledDataset:
    """Load a bundled dataset by registry name."""
    if name == "iris":
        return load_iris()
    if name == "wine":
        return load_wine()
    if name == "balance":
        return load_balance()
    if name == "thyroid":
        return load_thyroid()
    if name == "mnist":
        return load_mnist(limit=limit, seed=seed)
    if name == "mnist2499":
        return load_mnist(limit=2499, seed=seed)
    raise KeyError(f"unknown bundled dataset {name!r}; known: {BUILTIN_DATASETS + ('mnist2499',)}")
