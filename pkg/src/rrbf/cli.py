"""Command-line front end: train a network, compare methods under
cross-validation, and project data through saved artifacts.

Exit codes: 0 success, 2 usage or configuration error, 3 data error,
4 anything else. Every command writes a manifest.json of its effective
configuration; rerunning with the same flags reproduces all outputs
byte for byte.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .baselines import lda_fit, pca_fit, transform
from .dataset import (
    BUILTIN_DATASETS,
    LabeledDataset,
    apply_normalizer,
    fit_normalizer,
    load_builtin,
    load_delimited,
    load_idx,
    stratified_folds,
)
from .evaluation import METHOD_KINDS, MethodSpec, cross_validate, format_report_table
from .exceptions import ConfigError, DataFormatError
from .figures import FigureSpec, export_curve, export_scatter, write_projection_csv
from .network import RRBFClassifier, project
from .persist import load_model, load_projector, save_classifier
from .projection import Projection2D

_REGISTRY_NAMES = BUILTIN_DATASETS + ("mnist2499",)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _grid(text: str):
    try:
        rows, cols = text.lower().split("x")
        return int(rows), int(cols)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 10x10, got {text!r}") from None


def _input_scale(text: str):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"input scale must be a number or 'auto', got {text!r}") from None


def _label_col(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def _add_data_arguments(p: argparse.ArgumentParser):
    p.add_argument("--data", required=True,
                   help=f"dataset: a bundled name ({', '.join(_REGISTRY_NAMES)}), "
                        "a delimited text file, or an IDX image file (with --labels)")
    p.add_argument("--labels", default=None, help="IDX label file accompanying --data")
    p.add_argument("--label-col", type=_label_col, default=-1,
                   help="label column index or (with --header) name; default last column")
    p.add_argument("--delimiter", default=",", help="field delimiter for text files")
    p.add_argument("--header", action="store_true", help="first row of the text file is a header")
    p.add_argument("--limit", type=_positive_int, default=None,
                   help="stratified subsample size for IDX/mnist loads")


def _add_network_arguments(p: argparse.ArgumentParser):
    p.add_argument("--grid", type=_grid, default=(10, 10), help="hidden grid, e.g. 10x10")
    p.add_argument("--epochs", type=_positive_int, default=500)
    p.add_argument("--eta", type=float, default=0.1, help="learning rate")
    p.add_argument("--s-start", type=float, default=50.0, help="initial neighborhood width")
    p.add_argument("--s-end", type=float, default=0.01, help="final neighborhood width")
    p.add_argument("--input-scale", type=_input_scale, default="auto",
                   help="input gain before the radial layer; 'auto' = 1/sqrt(features)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rrbf",
        description="Train, evaluate, and plot a grid-hidden-layer RBF classifier "
                    "against PCA/LDA/kNN baselines.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit a network and save model + learning curve")
    _add_data_arguments(p_train)
    _add_network_arguments(p_train)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--out", required=True, help="output directory")
    p_train.set_defaults(func=cmd_train)

    p_cmp = sub.add_parser("compare", help="cross-validate methods and emit a report table")
    _add_data_arguments(p_cmp)
    _add_network_arguments(p_cmp)
    p_cmp.add_argument("--method", action="append", choices=METHOD_KINDS, default=None,
                       help="repeatable; default: all four methods")
    p_cmp.add_argument("--dim", type=_positive_int, default=None,
                       help="target dimension for the reducers (default 2, LDA capped at K-1)")
    p_cmp.add_argument("--k", type=_positive_int, default=3, help="nearest neighbors")
    p_cmp.add_argument("--folds", type=_positive_int, default=10)
    p_cmp.add_argument("--seed", type=int, default=0)
    p_cmp.add_argument("--jobs", type=_positive_int, default=1, help="parallel folds")
    p_cmp.add_argument("--out", required=True)
    p_cmp.set_defaults(func=cmd_compare)

    p_proj = sub.add_parser("project", help="project data through a saved model or projector")
    p_proj.add_argument("--artifact", required=True, help="model or projector file")
    _add_data_arguments(p_proj)
    p_proj.add_argument("--out", required=True)
    p_proj.set_defaults(func=cmd_project)

    return parser


def _load_dataset(args) -> LabeledDataset:
    if args.data in _REGISTRY_NAMES:
        return load_builtin(args.data, limit=args.limit)
    if args.labels is not None:
        return load_idx(args.data, args.labels, limit=args.limit)
    return load_delimited(
        args.data, label_col=args.label_col, delimiter=args.delimiter, header=args.header
    )


def _write_manifest(out_dir: str, command: str, settings: dict, outputs: list):
    manifest = {
        "command": command,
        "package_version": __version__,
        "settings": settings,
        "outputs": sorted(outputs),
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def _dataset_settings(args) -> dict:
    return {
        "data": args.data,
        "labels": args.labels,
        "label_col": args.label_col,
        "delimiter": args.delimiter,
        "header": args.header,
        "limit": args.limit,
    }


def cmd_train(args) -> int:
    dataset = _load_dataset(args)
    norm = fit_normalizer(dataset.X)
    clf = RRBFClassifier(
        grid_rows=args.grid[0],
        grid_cols=args.grid[1],
        epochs=args.epochs,
        s_start=args.s_start,
        s_end=args.s_end,
        eta=args.eta,
        input_scale=args.input_scale,
        seed=args.seed,
    ).fit(norm.apply(dataset.X), dataset.y)

    os.makedirs(args.out, exist_ok=True)
    model_path = os.path.join(args.out, "model.rrbf")
    save_classifier(model_path, clf, normalizer=norm, class_names=dataset.class_names)
    trace = clf.train_trace_
    curve_path = os.path.join(args.out, "learning_curve.svg")
    export_curve(
        [(float(t), float(e)) for t, e in enumerate(trace.loss)],
        FigureSpec(title=f"Learning curve ({dataset.name})", x_label="epoch", y_label="mean loss"),
        curve_path,
    )
    _write_manifest(
        args.out,
        "train",
        {
            **_dataset_settings(args),
            "grid": list(args.grid),
            "epochs": args.epochs,
            "eta": args.eta,
            "s_start": args.s_start,
            "s_end": args.s_end,
            "input_scale": args.input_scale,
            "seed": args.seed,
        },
        ["model.rrbf", "learning_curve.svg", "learning_curve.csv", "manifest.json"],
    )
    print(f"trained on {dataset.name}: final training error {trace.error_rate[-1]:.1f}%")
    print(f"model written to {model_path}")
    return 0


def _method_specs(args, dataset) -> list:
    kinds = args.method or list(METHOD_KINDS)
    specs = []
    for kind in kinds:
        dim = args.dim if kind in ("pca_knn", "lda_knn") else None
        specs.append(
            MethodSpec(
                kind=kind,
                dim=dim,
                k=args.k,
                grid_rows=args.grid[0],
                grid_cols=args.grid[1],
                epochs=args.epochs,
                s_start=args.s_start,
                s_end=args.s_end,
                eta=args.eta,
                input_scale=args.input_scale,
            )
        )
    for spec in specs:
        spec.validate_for(dataset)
    return specs


def _figure_projection(kind, dataset_norm, args) -> Projection2D | None:
    """Whole-dataset 2-D view for a method, on normalized features."""
    if kind == "pca_knn":
        return transform(pca_fit(dataset_norm, 2), dataset_norm)
    if kind == "lda_knn":
        m = min(2, dataset_norm.n_classes - 1)
        reduced = transform(lda_fit(dataset_norm, m), dataset_norm.X)
        if reduced.shape[1] == 1:  # two-class data projects onto a line
            reduced = np.column_stack([reduced[:, 0], np.zeros(len(reduced))])
        return Projection2D(points=reduced, labels=dataset_norm.y, source="lda")
    if kind == "rrbf":
        clf = RRBFClassifier(
            grid_rows=args.grid[0],
            grid_cols=args.grid[1],
            epochs=args.epochs,
            s_start=args.s_start,
            s_end=args.s_end,
            eta=args.eta,
            input_scale=args.input_scale,
            seed=args.seed,
        ).fit(dataset_norm.X, dataset_norm.y)
        return clf.crsom_projection(dataset_norm.X, dataset_norm.y)
    return None


def cmd_compare(args) -> int:
    dataset = _load_dataset(args)
    specs = _method_specs(args, dataset)
    plan = stratified_folds(dataset, args.folds, seed=args.seed)
    reports = [
        cross_validate(spec, dataset, plan, seed=args.seed, n_jobs=args.jobs)
        for spec in specs
    ]

    os.makedirs(args.out, exist_ok=True)
    table = format_report_table([(dataset.name, reports)])
    report_path = os.path.join(args.out, "report.csv")
    with open(report_path, "w", encoding="utf-8") as f:
        f.write(table)
    print(table, end="")

    outputs = ["report.csv", "manifest.json"]
    norm = fit_normalizer(dataset.X)
    dataset_norm = apply_normalizer(norm, dataset)
    figure_names = {"rrbf": "crsom", "pca_knn": "pca", "lda_knn": "lda"}
    for spec in specs:
        tag = figure_names.get(spec.kind)
        if tag is None:
            continue
        proj = _figure_projection(spec.kind, dataset_norm, args)
        svg = os.path.join(args.out, f"scatter_{tag}.svg")
        export_scatter(
            proj,
            FigureSpec(title=f"{tag.upper()} ({dataset.name})", x_label="u", y_label="v"),
            svg,
            class_names=dataset.class_names,
        )
        write_projection_csv(proj, os.path.join(args.out, f"scatter_{tag}.csv"))
        outputs.extend([f"scatter_{tag}.svg", f"scatter_{tag}.csv"])

    _write_manifest(
        args.out,
        "compare",
        {
            **_dataset_settings(args),
            "methods": [spec.label() for spec in specs],
            "dim": args.dim,
            "k": args.k,
            "folds": args.folds,
            "seed": args.seed,
            "grid": list(args.grid),
            "epochs": args.epochs,
            "eta": args.eta,
            "s_start": args.s_start,
            "s_end": args.s_end,
            "input_scale": args.input_scale,
        },
        outputs,
    )
    return 0


def _artifact_kind(path: str) -> str:
    with open(path, encoding="utf-8") as f:
        first = f.readline().strip()
    if first == "rrbf-model v1":
        return "model"
    if first == "rrbf-projector v1":
        return "projector"
    raise DataFormatError(f"{path}: not a recognized artifact file")


def cmd_project(args) -> int:
    kind = _artifact_kind(args.artifact)
    dataset = _load_dataset(args)

    if kind == "model":
        saved = load_model(args.artifact)
        if saved.model.n_features != dataset.n_features:
            raise ConfigError(
                f"model expects {saved.model.n_features} features, "
                f"dataset has {dataset.n_features}"
            )
        X = dataset.X
        if saved.normalizer is not None:
            X = saved.normalizer.apply(X)
        scaled = LabeledDataset(
            X * saved.input_scale, dataset.y, dataset.name, dataset.class_names
        )
        proj = project(scaled, saved.model)
        title = f"CRSOM ({dataset.name})"
    else:
        saved = load_projector(args.artifact)
        if saved.projector.n_features != dataset.n_features:
            raise ConfigError(
                f"projector expects {saved.projector.n_features} features, "
                f"dataset has {dataset.n_features}"
            )
        X = dataset.X
        if saved.normalizer is not None:
            X = saved.normalizer.apply(X)
        reduced = transform(saved.projector, X)
        if reduced.shape[1] == 1:
            reduced = np.column_stack([reduced[:, 0], np.zeros(len(reduced))])
        elif reduced.shape[1] > 2:
            reduced = reduced[:, :2]
        proj = Projection2D(points=reduced, labels=dataset.y, source=saved.projector.kind)
        title = f"{saved.projector.kind.upper()} ({dataset.name})"

    os.makedirs(args.out, exist_ok=True)
    export_scatter(
        proj,
        FigureSpec(title=title, x_label="u", y_label="v"),
        os.path.join(args.out, "projection.svg"),
        class_names=dataset.class_names,
    )
    write_projection_csv(proj, os.path.join(args.out, "projection.csv"))
    _write_manifest(
        args.out,
        "project",
        {**_dataset_settings(args), "artifact": args.artifact},
        ["projection.svg", "projection.csv", "manifest.json"],
    )
    print(f"projected {len(proj)} samples through {args.artifact}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DataFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # anything unexpected
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
