"""Restricted RBF network with a 2-D self-organizing hidden layer.

The classifier trains a grid of radial units whose winner map doubles as a
supervised 2-D projection of the data, so classification and visualization
share one representation. The package also ships PCA/LDA/kNN baselines, a
cross-validation harness, bundled benchmark datasets, and SVG figure export.
"""

__version__ = "1.0.0"

from .baselines import (
    KNNClassifier,
    LDAReducer,
    LinearProjector,
    PCAReducer,
    knn_classify,
    knn_predict,
    lda_fit,
    pca_fit,
    transform,
)
from .dataset import (
    BUILTIN_DATASETS,
    FoldPlan,
    LabeledDataset,
    NormalizationParams,
    ZScoreScaler,
    apply_normalizer,
    fit_normalizer,
    load_balance,
    load_builtin,
    load_delimited,
    load_idx,
    load_iris,
    load_mnist,
    load_thyroid,
    load_wine,
    stratified_folds,
)
from .evaluation import (
    EvalReport,
    MethodSpec,
    cross_validate,
    dimension_sweep,
    error_rate,
    format_report_table,
)
from .exceptions import ConfigError, DataFormatError
from .figures import FigureSpec, export_curve, export_scatter
from .grid import GridSpec, Schedule
from .network import RRBFClassifier, RRBFModel, TrainTrace, fit, predict, predict_batch, project
from .persist import load_model, load_projector, save_classifier, save_model, save_projector
from .projection import Projection2D
from .rng import SeededStream

__all__ = [
    "__version__",
    "BUILTIN_DATASETS",
    "ConfigError",
    "DataFormatError",
    "EvalReport",
    "FigureSpec",
    "FoldPlan",
    "GridSpec",
    "KNNClassifier",
    "LDAReducer",
    "LabeledDataset",
    "LinearProjector",
    "MethodSpec",
    "NormalizationParams",
    "PCAReducer",
    "Projection2D",
    "RRBFClassifier",
    "RRBFModel",
    "Schedule",
    "SeededStream",
    "TrainTrace",
    "ZScoreScaler",
    "apply_normalizer",
    "cross_validate",
    "dimension_sweep",
    "error_rate",
    "export_curve",
    "export_scatter",
    "fit",
    "fit_normalizer",
    "format_report_table",
    "knn_classify",
    "knn_predict",
    "lda_fit",
    "load_balance",
    "load_builtin",
    "load_delimited",
    "load_idx",
    "load_iris",
    "load_mnist",
    "load_thyroid",
    "load_wine",
    "pca_fit",
    "predict",
    "predict_batch",
    "project",
    "save_classifier",
    "save_model",
    "save_projector",
    "stratified_folds",
    "transform",
]
