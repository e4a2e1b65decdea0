"""Versioned text serialization for trained models and projectors.

The format is line oriented and self describing: a tagged header, keyword
lines, then labeled matrix blocks in row-major order. Floats are written with
17 significant digits, which round-trips every double exactly. An optional
normalizer block carries the z-score statistics the artifact was fitted
behind, so projecting new data reproduces the training pipeline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .baselines import LinearProjector
from .dataset import NormalizationParams
from .exceptions import DataFormatError
from .grid import GridSpec, Schedule
from .network import RRBFClassifier, RRBFModel

__all__ = [
    "SavedModel",
    "SavedProjector",
    "save_model",
    "load_model",
    "save_projector",
    "load_projector",
    "save_classifier",
    "classifier_from_saved",
]

_MODEL_TAG = "rrbf-model v1"
_PROJECTOR_TAG = "rrbf-projector v1"


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def _fmt_row(row) -> str:
    return " ".join(_fmt(v) for v in row)


def _parse_floats(line: str, path, lineno: int) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in line.split()])
    except ValueError:
        raise DataFormatError(f"{path}: line {lineno}: expected numbers") from None


class _Reader:
    def __init__(self, path):
        self.path = str(path)
        with open(path, encoding="utf-8") as f:
            self.lines = f.read().splitlines()
        self.pos = 0

    def next(self) -> str:
        if self.pos >= len(self.lines):
            raise DataFormatError(f"{self.path}: unexpected end of file")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def keyword(self, key: str) -> str:
        lineno = self.pos + 1
        line = self.next()
        if not line.startswith(key + " ") and line != key:
            raise DataFormatError(f"{self.path}: line {lineno}: expected {key!r}")
        return line[len(key):].strip()

    def floats(self, count: int) -> np.ndarray:
        lineno = self.pos + 1
        vals = _parse_floats(self.next(), self.path, lineno)
        if len(vals) != count:
            raise DataFormatError(
                f"{self.path}: line {lineno}: expected {count} values, got {len(vals)}"
            )
        return vals

    def matrix(self, rows: int, cols: int) -> np.ndarray:
        return np.vstack([self.floats(cols) for _ in range(rows)])


def _write_normalizer(lines: list, normalizer: NormalizationParams | None):
    if normalizer is None:
        lines.append("normalizer 0")
        return
    lines.append("normalizer 1")
    lines.append("normalizer_mean " + _fmt_row(normalizer.mean))
    lines.append("normalizer_scale " + _fmt_row(normalizer.scale))
    lines.append("normalizer_active " + " ".join("1" if a else "0" for a in normalizer.active))


def _read_normalizer(r: _Reader, d: int) -> NormalizationParams | None:
    flag = r.keyword("normalizer")
    if flag == "0":
        return None
    if flag != "1":
        raise DataFormatError(f"{r.path}: normalizer flag must be 0 or 1")
    mean = _parse_floats(r.keyword("normalizer_mean"), r.path, r.pos)
    scale = _parse_floats(r.keyword("normalizer_scale"), r.path, r.pos)
    active_tokens = r.keyword("normalizer_active").split()
    if not (len(mean) == len(scale) == len(active_tokens) == d):
        raise DataFormatError(f"{r.path}: normalizer blocks disagree with feature count {d}")
    active = np.array([tok == "1" for tok in active_tokens])
    return NormalizationParams(mean=mean, scale=scale, active=active)


@dataclass(frozen=True)
class SavedModel:
    model: RRBFModel
    schedule: Schedule
    input_scale: float
    class_names: tuple
    normalizer: NormalizationParams | None


@dataclass(frozen=True)
class SavedProjector:
    projector: LinearProjector
    class_names: tuple
    normalizer: NormalizationParams | None


def save_model(path, model: RRBFModel, schedule: Schedule, input_scale: float = 1.0,
               class_names=(), normalizer: NormalizationParams | None = None):
    s = schedule
    lines = [
        _MODEL_TAG,
        f"grid {model.grid.rows} {model.grid.cols}",
        f"features {model.n_features}",
        f"classes {model.n_classes}",
        "class_names " + json.dumps(list(class_names or [str(c) for c in range(model.n_classes)])),
        f"schedule {_fmt(s.s_start)} {_fmt(s.s_end)} {s.t_end} {_fmt(s.eta)} {s.seed}",
        f"input_scale {_fmt(input_scale)}",
        f"inference_width {_fmt(model.inference_width)}",
    ]
    _write_normalizer(lines, normalizer)
    lines.append("W")
    lines.extend(_fmt_row(row) for row in model.W)
    lines.append("V")
    lines.extend(_fmt_row(row) for row in model.V)
    lines.append("theta")
    lines.append(_fmt_row(model.theta))
    lines.append("end")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def load_model(path) -> SavedModel:
    try:
        return _load_model_body(path)
    except DataFormatError:
        raise
    except (ValueError, IndexError) as exc:
        raise DataFormatError(f"{path}: malformed model file ({exc})") from None


def _load_model_body(path) -> SavedModel:
    r = _Reader(path)
    if r.next() != _MODEL_TAG:
        raise DataFormatError(f"{r.path}: not a {_MODEL_TAG} file")
    rows, cols = (int(tok) for tok in r.keyword("grid").split())
    d = int(r.keyword("features"))
    k = int(r.keyword("classes"))
    try:
        class_names = tuple(json.loads(r.keyword("class_names")))
    except json.JSONDecodeError:
        raise DataFormatError(f"{r.path}: malformed class_names") from None
    tok = r.keyword("schedule").split()
    if len(tok) != 5:
        raise DataFormatError(f"{r.path}: schedule line needs 5 fields")
    schedule = Schedule(
        s_start=float(tok[0]), s_end=float(tok[1]), t_end=int(tok[2]),
        eta=float(tok[3]), seed=int(tok[4]),
    )
    input_scale = float(r.keyword("input_scale"))
    inference_width = float(r.keyword("inference_width"))
    normalizer = _read_normalizer(r, d)
    grid = GridSpec(rows, cols)
    if r.next() != "W":
        raise DataFormatError(f"{r.path}: expected W block")
    W = r.matrix(grid.size, d)
    if r.next() != "V":
        raise DataFormatError(f"{r.path}: expected V block")
    V = r.matrix(grid.size, k)
    if r.next() != "theta":
        raise DataFormatError(f"{r.path}: expected theta block")
    theta = r.floats(k)
    if r.next() != "end":
        raise DataFormatError(f"{r.path}: expected end marker")
    model = RRBFModel(W=W, V=V, theta=theta, grid=grid, inference_width=inference_width)
    if len(class_names) != k:
        raise DataFormatError(f"{r.path}: {len(class_names)} class names for {k} classes")
    return SavedModel(
        model=model, schedule=schedule, input_scale=input_scale,
        class_names=class_names, normalizer=normalizer,
    )


def save_projector(path, projector: LinearProjector, class_names=(),
                   normalizer: NormalizationParams | None = None):
    lines = [
        _PROJECTOR_TAG,
        f"kind {projector.kind}",
        f"features {projector.n_features}",
        f"components {projector.n_components}",
        "class_names " + json.dumps(list(class_names)),
        "values " + _fmt_row(projector.values),
        f"degenerate {1 if projector.degenerate else 0}",
    ]
    _write_normalizer(lines, normalizer)
    lines.append("mean")
    lines.append(_fmt_row(projector.mean))
    lines.append("basis")
    lines.extend(_fmt_row(col) for col in projector.basis.T)  # one direction per line
    lines.append("end")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def load_projector(path) -> SavedProjector:
    try:
        return _load_projector_body(path)
    except DataFormatError:
        raise
    except (ValueError, IndexError) as exc:
        raise DataFormatError(f"{path}: malformed projector file ({exc})") from None


def _load_projector_body(path) -> SavedProjector:
    r = _Reader(path)
    if r.next() != _PROJECTOR_TAG:
        raise DataFormatError(f"{r.path}: not a {_PROJECTOR_TAG} file")
    kind = r.keyword("kind")
    d = int(r.keyword("features"))
    m = int(r.keyword("components"))
    try:
        class_names = tuple(json.loads(r.keyword("class_names")))
    except json.JSONDecodeError:
        raise DataFormatError(f"{r.path}: malformed class_names") from None
    values = _parse_floats(r.keyword("values"), r.path, r.pos)
    if len(values) != m:
        raise DataFormatError(f"{r.path}: expected {m} values")
    degenerate = r.keyword("degenerate") == "1"
    normalizer = _read_normalizer(r, d)
    if r.next() != "mean":
        raise DataFormatError(f"{r.path}: expected mean block")
    mean = r.floats(d)
    if r.next() != "basis":
        raise DataFormatError(f"{r.path}: expected basis block")
    basis = r.matrix(m, d).T
    if r.next() != "end":
        raise DataFormatError(f"{r.path}: expected end marker")
    projector = LinearProjector(
        mean=mean, basis=basis, kind=kind, values=values, degenerate=degenerate
    )
    return SavedProjector(projector=projector, class_names=class_names, normalizer=normalizer)


def save_classifier(path, clf: RRBFClassifier, normalizer: NormalizationParams | None = None,
                    class_names=None):
    """Persist a fitted RRBFClassifier together with its pipeline normalizer."""
    if clf.model_ is None:
        raise ValueError("classifier is not fitted")
    if class_names is None:
        class_names = tuple(str(c) for c in clf.classes_)
    save_model(
        path,
        clf.model_,
        clf.schedule_,
        input_scale=clf.input_scale_,
        class_names=class_names,
        normalizer=normalizer,
    )


def classifier_from_saved(saved: SavedModel) -> RRBFClassifier:
    """Rebuild a fitted classifier (minus the training trace) from a file."""
    clf = RRBFClassifier(
        grid_rows=saved.model.grid.rows,
        grid_cols=saved.model.grid.cols,
        epochs=saved.schedule.t_end,
        s_start=saved.schedule.s_start,
        s_end=saved.schedule.s_end,
        eta=saved.schedule.eta,
        input_scale=saved.input_scale,
        seed=saved.schedule.seed,
    )
    clf.model_ = saved.model
    clf.schedule_ = saved.schedule
    clf.input_scale_ = saved.input_scale
    clf.classes_ = np.arange(saved.model.n_classes)
    clf.n_features_in_ = saved.model.n_features
    clf.train_trace_ = None
    return clf
