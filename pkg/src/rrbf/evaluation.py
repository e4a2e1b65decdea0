"""Cross-validation harness producing per-fold error-rate reports.

Every fold fits the normalizer and the method on the training portion only,
then scores the held-out fold, so no test statistics ever leak into fitting.
Model training inside a fold uses an independent seed derived from
(master seed, fold id); reports are therefore byte-identical across reruns
with the same seeds, regardless of fold execution order or thread count.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .baselines import knn_predict, lda_fit, pca_fit, transform
from .dataset import FoldPlan, LabeledDataset, fit_normalizer, stratified_folds
from .exceptions import ConfigError
from .network import RRBFClassifier

__all__ = [
    "METHOD_KINDS",
    "MethodSpec",
    "EvalReport",
    "error_rate",
    "cross_validate",
    "dimension_sweep",
    "format_report_table",
]

METHOD_KINDS = ("rrbf", "pca_knn", "lda_knn", "knn_raw")


@dataclass(frozen=True)
class MethodSpec:
    """A classification method as run by the harness.

    dim applies to the reducers; None resolves to 2 for PCA and min(2, K-1)
    for LDA at validation time. The remaining fields configure the network.
    """

    kind: str
    dim: int | None = None
    k: int = 3
    grid_rows: int = 10
    grid_cols: int = 10
    epochs: int = 500
    s_start: float = 50.0
    s_end: float = 0.01
    eta: float = 0.1
    input_scale: float | str = "auto"

    def __post_init__(self):
        if self.kind not in METHOD_KINDS:
            raise ConfigError(f"unknown method kind {self.kind!r}; known: {METHOD_KINDS}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.dim is not None and self.dim < 1:
            raise ConfigError(f"dim must be >= 1, got {self.dim}")

    def resolved_dim(self, dataset: LabeledDataset) -> int | None:
        if self.kind == "pca_knn":
            return self.dim if self.dim is not None else 2
        if self.kind == "lda_knn":
            return self.dim if self.dim is not None else min(2, dataset.n_classes - 1)
        return None

    def validate_for(self, dataset: LabeledDataset):
        """Reject impossible configurations before any fold runs."""
        m = self.resolved_dim(dataset)
        if self.kind == "pca_knn" and m > dataset.n_features:
            raise ConfigError(
                f"{self.label()}: dim {m} exceeds {dataset.n_features} features"
            )
        if self.kind == "lda_knn":
            bound = dataset.n_classes - 1
            if m > bound:
                raise ConfigError(
                    f"{self.label()}: dim {m} exceeds the class-count bound {bound} "
                    f"for {dataset.n_classes} classes"
                )
            if m > dataset.n_features:
                raise ConfigError(
                    f"{self.label()}: dim {m} exceeds {dataset.n_features} features"
                )

    def label(self) -> str:
        if self.kind in ("pca_knn", "lda_knn"):
            return f"{self.kind}({self.dim})" if self.dim is not None else self.kind
        return self.kind


@dataclass(frozen=True)
class EvalReport:
    """Per-fold error rates (percent) with their mean and population standard
    deviation; the stored statistics always match the folds exactly."""

    method: MethodSpec
    fold_errors: np.ndarray
    mean: float
    sd: float
    wall_time: float
    seed: int
    sd_convention: str = "population"
    fold_models: tuple = field(default=(), repr=False, compare=False)

    @classmethod
    def from_folds(cls, method, errors, wall_time, seed, fold_models=()):
        errors = np.asarray(errors, dtype=np.float64)
        return cls(
            method=method,
            fold_errors=errors,
            mean=float(errors.mean()),
            sd=float(errors.std()),
            wall_time=float(wall_time),
            seed=int(seed),
            fold_models=tuple(fold_models),
        )

    def cell(self) -> str:
        """Table cell in the shape 'mean (sd)', one decimal place."""
        return f"{self.mean:.1f} ({self.sd:.1f})"


def error_rate(predictions, truth) -> float:
    """Percentage of mismatches between predictions and ground truth."""
    predictions = np.asarray(predictions)
    truth = np.asarray(truth)
    if predictions.shape != truth.shape:
        raise ValueError(
            f"length mismatch: {predictions.shape} predictions vs {truth.shape} labels"
        )
    if predictions.size == 0:
        raise ValueError("cannot compute an error rate over zero samples")
    return 100.0 * float((predictions != truth).mean())


def _fold_seed(master_seed: int, fold: int) -> int:
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(fold),))
    return int(seq.generate_state(1, np.uint64)[0])


def _run_fold(method: MethodSpec, dataset: LabeledDataset, plan: FoldPlan, fold: int, seed: int):
    train = dataset.subset(plan.train_indices(fold))
    test_idx = plan.test_indices(fold)
    norm = fit_normalizer(train.X)
    X_train = norm.apply(train.X)
    y_train = train.y
    X_test = norm.apply(dataset.X[test_idx])
    y_test = dataset.y[test_idx]

    fitted = None
    if method.kind == "rrbf":
        clf = RRBFClassifier(
            grid_rows=method.grid_rows,
            grid_cols=method.grid_cols,
            epochs=method.epochs,
            s_start=method.s_start,
            s_end=method.s_end,
            eta=method.eta,
            input_scale=method.input_scale,
            seed=_fold_seed(seed, fold),
        ).fit(X_train, y_train)
        predictions = clf.predict(X_test)
        fitted = (clf, norm)
    elif method.kind == "knn_raw":
        predictions = knn_predict(X_train, y_train, X_test, method.k)
        fitted = norm
    elif method.kind == "pca_knn":
        proj = pca_fit(X_train, method.resolved_dim(dataset))
        predictions = knn_predict(
            transform(proj, X_train), y_train, transform(proj, X_test), method.k
        )
        fitted = (proj, norm)
    else:  # lda_knn
        ds_train = LabeledDataset(X_train, y_train, name="fold-train", class_names=dataset.class_names)
        proj = lda_fit(ds_train, method.resolved_dim(dataset))
        predictions = knn_predict(
            transform(proj, X_train), y_train, transform(proj, X_test), method.k
        )
        fitted = (proj, norm)
    return error_rate(predictions, y_test), fitted


def cross_validate(
    method: MethodSpec,
    dataset: LabeledDataset,
    plan: FoldPlan,
    seed: int = 0,
    n_jobs: int = 1,
    keep_models: bool = False,
) -> EvalReport:
    """Run the method over every fold of the plan and report fold errors."""
    if plan.n_samples != dataset.n_samples:
        raise ConfigError(
            f"fold plan covers {plan.n_samples} samples, dataset has {dataset.n_samples}"
        )
    if (dataset.class_counts() < 2).any():
        raise ConfigError("every class needs at least 2 samples for cross-validation")
    method.validate_for(dataset)

    start = time.perf_counter()
    folds = range(plan.n_folds)
    if n_jobs == 1:
        results = [_run_fold(method, dataset, plan, f, seed) for f in folds]
    else:
        workers = n_jobs if n_jobs > 0 else (os.cpu_count() or 1)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda f: _run_fold(method, dataset, plan, f, seed), folds))
    wall = time.perf_counter() - start
    errors = [err for err, _ in results]
    fold_models = tuple(fit for _, fit in results) if keep_models else ()
    return EvalReport.from_folds(method, errors, wall, seed, fold_models)


def dimension_sweep(
    kind: str,
    dataset: LabeledDataset,
    dims,
    n_folds: int = 10,
    seed: int = 0,
    k: int = 3,
    n_jobs: int = 1,
) -> list:
    """Cross-validate a reduce-then-classify method at each target dimension.

    All dimensions share one fold plan so the sweep isolates the effect of m.
    Configuration failures are reported with the offending dimension named.
    """
    plan = stratified_folds(dataset, n_folds, seed)
    reports = []
    for m in dims:
        method = MethodSpec(kind=kind, dim=int(m), k=k)
        try:
            method.validate_for(dataset)
        except ConfigError as exc:
            raise ConfigError(f"dimension {m}: {exc}") from None
        reports.append(cross_validate(method, dataset, plan, seed=seed, n_jobs=n_jobs))
    return reports


def format_report_table(rows) -> str:
    """Delimited table: one row per dataset, one column per method, each cell
    'mean (sd)'. rows is an iterable of (dataset_name, [EvalReport, ...])."""
    rows = list(rows)
    if not rows:
        raise ValueError("no report rows to format")
    header_labels = [report.method.label() for report in rows[0][1]]
    lines = ["dataset," + ",".join(header_labels)]
    for name, reports in rows:
        labels = [report.method.label() for report in reports]
        if labels != header_labels:
            raise ValueError(f"row {name!r} has methods {labels}, expected {header_labels}")
        lines.append(name + "," + ",".join(report.cell() for report in reports))
    return "\n".join(lines) + "\n"
