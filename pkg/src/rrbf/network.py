"""The restricted RBF network.

The hidden layer is a 2-D grid of radial units; each unit j holds a reference
vector W_j in input space. An input activates unit j by
sigma(win, j, t) * exp(-I_j) where I_j is the squared distance to W_j and the
neighborhood factor sigma gates activity around the unit whose reference
vector is nearest (the winner). A sigmoid output layer reads the hidden
activity, and online gradient descent on the squared output error trains
reference vectors, output weights, and biases together. The winner map that
emerges during training is the class-aware 2-D projection (CRSOM) that
predict/project expose.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator, ClassifierMixin

from ._validation import (
    as_float_matrix,
    as_float_vector,
    as_label_vector,
    check_fitted,
    check_n_features,
    check_same_length,
)
from .dataset import LabeledDataset
from .grid import GridSpec, Schedule, neighborhood_width, squared_distance_table
from .projection import Projection2D
from .rng import SeededStream

__all__ = [
    "EXP_CLAMP",
    "RRBFModel",
    "ForwardTrace",
    "TrainTrace",
    "Gradients",
    "activation_distance",
    "find_winner",
    "hidden_outputs",
    "forward",
    "loss",
    "backward",
    "apply_updates",
    "fit",
    "predict",
    "predict_batch",
    "project",
    "RRBFClassifier",
]

# squared distances are clamped here before exponentiation so far units keep a
# representable (if negligible) activation instead of a hard zero gradient
EXP_CLAMP = 700.0

# sigmoid outputs are pinned strictly inside (0, 1); keeps the forward-trace
# contract and the O*(1-O) error factor finite at saturation
_OUT_CLIP = 1e-15


@dataclass(frozen=True)
class RRBFModel:
    """Trained parameters: reference vectors W (units x features), output
    weights V (units x classes), output biases theta (classes)."""

    W: np.ndarray
    V: np.ndarray
    theta: np.ndarray
    grid: GridSpec
    inference_width: float = 0.01  # neighborhood width used by predict/project

    def __post_init__(self):
        W = np.asarray(self.W, dtype=np.float64)
        V = np.asarray(self.V, dtype=np.float64)
        theta = np.asarray(self.theta, dtype=np.float64)
        if W.ndim != 2 or W.shape[0] != self.grid.size:
            raise ValueError(f"W must be ({self.grid.size}, d), got {W.shape}")
        if V.ndim != 2 or V.shape[0] != W.shape[0]:
            raise ValueError(f"V must be ({W.shape[0]}, K), got {V.shape}")
        if theta.shape != (V.shape[1],):
            raise ValueError(f"theta must be ({V.shape[1]},), got {theta.shape}")
        for name, arr in (("W", W), ("V", V), ("theta", theta)):
            if not np.isfinite(arr).all():
                raise ValueError(f"{name} contains non-finite entries")
        if self.inference_width <= 0:
            raise ValueError("inference_width must be positive")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "theta", theta)

    @property
    def n_features(self) -> int:
        return self.W.shape[1]

    @property
    def n_classes(self) -> int:
        return self.V.shape[1]


@dataclass(frozen=True)
class ForwardTrace:
    """One forward pass: distances I, winner index, hidden and output activity."""

    I: np.ndarray
    win: int
    hidden: np.ndarray
    output: np.ndarray


@dataclass(frozen=True)
class TrainTrace:
    """Per-epoch mean loss and training error rate (percent), measured online
    as each sample is visited, before its own update."""

    loss: np.ndarray
    error_rate: np.ndarray

    def __len__(self) -> int:
        return len(self.loss)


@dataclass(frozen=True)
class Gradients:
    """Update directions (applied additively, scaled by eta, they descend the
    squared output error)."""

    dW: np.ndarray
    dV: np.ndarray
    dtheta: np.ndarray


def _sigmoid(net: np.ndarray) -> np.ndarray:
    z = np.exp(-np.abs(net))
    out = np.where(net >= 0, 1.0 / (1.0 + z), z / (1.0 + z))
    return np.clip(out, _OUT_CLIP, 1.0 - _OUT_CLIP)


def activation_distance(x, w) -> float:
    """Radial input: squared Euclidean distance between x and a reference vector."""
    x = as_float_vector(x)
    w = as_float_vector(w, "w")
    if x.shape != w.shape:
        raise ValueError(f"length mismatch: x has {len(x)}, w has {len(w)}")
    diff = x - w
    return float(diff @ diff)


def find_winner(x, model: RRBFModel):
    """Winner unit (lowest index on ties) and the full distance vector I."""
    x = as_float_vector(x)
    if len(x) != model.n_features:
        raise ValueError(f"x has {len(x)} features, model expects {model.n_features}")
    diff = x - model.W
    I = (diff**2).sum(axis=1)
    return int(np.argmin(I)), I


def hidden_outputs(x, model: RRBFModel, t: float, sched: Schedule):
    """Distances, winner, and hidden activations sigma(win, j, t) * exp(-I_j)."""
    win, I = find_winner(x, model)
    width = neighborhood_width(t, sched)
    d2 = squared_distance_table(model.grid)[win]
    hidden = np.exp(-d2 / width) * np.exp(-np.minimum(I, EXP_CLAMP))
    return I, win, hidden


def forward(x, model: RRBFModel, t: float, sched: Schedule) -> ForwardTrace:
    """Full forward pass; outputs are sigmoids of V' hidden - theta."""
    I, win, hidden = hidden_outputs(x, model, t, sched)
    net = model.V.T @ hidden - model.theta
    return ForwardTrace(I=I, win=win, hidden=hidden, output=_sigmoid(net))


def loss(output, target) -> float:
    """Half the squared error between output and the teacher vector."""
    output = as_float_vector(output, "output")
    target = as_float_vector(target, "target")
    if output.shape != target.shape:
        raise ValueError(f"length mismatch: output {len(output)}, target {len(target)}")
    return float(0.5 * ((target - output) ** 2).sum())


def backward(trace: ForwardTrace, target, x, model: RRBFModel, t: float, sched: Schedule) -> Gradients:
    """Update directions for one sample from its forward trace.

    delta_k = (T_k - O_k) O_k (1 - O_k) per output; dV = hidden outer delta,
    dtheta = -delta. Each reference vector moves along
    exp(-I_j) (sum_k delta_k V_jk) sigma(win, j, t) (x - W_j); the winner and
    its neighborhood factor are held constant within the step.
    """
    target = as_float_vector(target, "target")
    x = as_float_vector(x)
    if len(target) != model.n_classes:
        raise ValueError(f"target has {len(target)} entries, model has {model.n_classes} classes")
    if len(x) != model.n_features:
        raise ValueError(f"x has {len(x)} features, model expects {model.n_features}")
    if len(trace.hidden) != model.grid.size or len(trace.output) != model.n_classes:
        raise ValueError("trace does not match model dimensions")

    delta = (target - trace.output) * trace.output * (1.0 - trace.output)
    dV = np.outer(trace.hidden, delta)
    dtheta = -delta
    width = neighborhood_width(t, sched)
    sigma = np.exp(-squared_distance_table(model.grid)[trace.win] / width)
    delta_hid = np.exp(-np.minimum(trace.I, EXP_CLAMP)) * (model.V @ delta)
    dW = (delta_hid * sigma)[:, None] * (x - model.W)
    return Gradients(dW=dW, dV=dV, dtheta=dtheta)


def apply_updates(model: RRBFModel, grads: Gradients, eta: float) -> RRBFModel:
    """New model with parameters moved eta along the update directions."""
    if grads.dW.shape != model.W.shape or grads.dV.shape != model.V.shape:
        raise ValueError("gradient shapes do not match model")
    return RRBFModel(
        W=model.W + eta * grads.dW,
        V=model.V + eta * grads.dV,
        theta=model.theta + eta * grads.dtheta,
        grid=model.grid,
        inference_width=model.inference_width,
    )


@njit(cache=True, nogil=True)
def _train_epochs(W, V, theta, X, y, orders, d2_grid, widths, eta):  # pragma: no cover
    n_units, n_feat = W.shape
    n_classes = V.shape[1]
    n = X.shape[0]
    n_epochs = orders.shape[0]
    loss_curve = np.zeros(n_epochs)
    err_curve = np.zeros(n_epochs)
    sigma = np.zeros((n_units, n_units))
    I = np.zeros(n_units)
    exp_i = np.zeros(n_units)
    hidden = np.zeros(n_units)
    out = np.zeros(n_classes)
    delta = np.zeros(n_classes)
    for t in range(n_epochs):
        width = widths[t]
        for a in range(n_units):
            for b in range(n_units):
                sigma[a, b] = np.exp(-d2_grid[a, b] / width)
        loss_sum = 0.0
        n_wrong = 0
        for q in range(n):
            i = orders[t, q]
            x = X[i]
            label = y[i]
            win = 0
            best = np.inf
            for j in range(n_units):
                acc = 0.0
                for f in range(n_feat):
                    diff = x[f] - W[j, f]
                    acc += diff * diff
                I[j] = acc
                if acc < best:
                    best = acc
                    win = j
            for j in range(n_units):
                clamped = I[j] if I[j] < 700.0 else 700.0
                exp_i[j] = np.exp(-clamped)
                hidden[j] = sigma[win, j] * exp_i[j]
            for k in range(n_classes):
                net = -theta[k]
                for j in range(n_units):
                    net += V[j, k] * hidden[j]
                if net >= 0.0:
                    o = 1.0 / (1.0 + np.exp(-net))
                else:
                    e = np.exp(net)
                    o = e / (1.0 + e)
                if o < 1e-15:
                    o = 1e-15
                elif o > 1.0 - 1e-15:
                    o = 1.0 - 1e-15
                out[k] = o
            sample_loss = 0.0
            pred = 0
            best_out = out[0]
            for k in range(n_classes):
                tk = 1.0 if k == label else 0.0
                diff = tk - out[k]
                sample_loss += 0.5 * diff * diff
                delta[k] = diff * out[k] * (1.0 - out[k])
                if out[k] > best_out:
                    best_out = out[k]
                    pred = k
            loss_sum += sample_loss
            if pred != label:
                n_wrong += 1
            for j in range(n_units):
                if hidden[j] == 0.0:
                    continue  # both the V row and W row updates are exactly zero
                backprop = 0.0
                for k in range(n_classes):
                    backprop += delta[k] * V[j, k]
                for k in range(n_classes):
                    V[j, k] += eta * delta[k] * hidden[j]
                coef = eta * exp_i[j] * backprop * sigma[win, j]
                for f in range(n_feat):
                    W[j, f] += coef * (x[f] - W[j, f])
            for k in range(n_classes):
                theta[k] -= eta * delta[k]
        loss_curve[t] = loss_sum / n
        err_curve[t] = 100.0 * n_wrong / n
    return loss_curve, err_curve


def _init_arrays(X: np.ndarray, n_classes: int, grid: GridSpec, stream: SeededStream):
    """Reference vectors start on randomly chosen training samples (box-uniform
    draws sit too far from the data in wide input spaces for exp(-I) to
    respond); output weights and biases start uniform in [-0.1, 0.1]."""
    n = len(X)
    if n >= grid.size:
        idx = stream.permutation(n)[: grid.size]
    else:
        idx = stream.integers(0, n, grid.size)
    W = X[idx].copy()
    V = stream.uniform(-0.1, 0.1, (grid.size, n_classes))
    theta = stream.uniform(-0.1, 0.1, n_classes)
    return W, V, theta


def fit(dataset: LabeledDataset, grid: GridSpec, sched: Schedule):
    """Train on the dataset for sched.t_end epochs of per-sample updates.

    Every epoch visits all samples in a freshly shuffled, seed-determined
    order. Returns the trained model and the per-epoch trace; the result is a
    pure function of (dataset, grid, sched).
    """
    if dataset.n_samples == 0:
        raise ValueError("cannot fit on an empty dataset")
    stream = SeededStream(sched.seed)
    W, V, theta = _init_arrays(dataset.X, dataset.n_classes, grid, stream.substream(0))
    shuffle = stream.substream(1)
    orders = np.stack([shuffle.permutation(dataset.n_samples) for _ in range(sched.t_end)])
    widths = np.array([neighborhood_width(t, sched) for t in range(sched.t_end)])
    loss_curve, err_curve = _train_epochs(
        W,
        V,
        theta,
        np.ascontiguousarray(dataset.X),
        dataset.y.astype(np.int64),
        orders.astype(np.int64),
        squared_distance_table(grid),
        widths,
        float(sched.eta),
    )
    model = RRBFModel(W=W, V=V, theta=theta, grid=grid, inference_width=sched.s_end)
    return model, TrainTrace(loss=loss_curve, error_rate=err_curve)


def _inference_sched(model: RRBFModel) -> Schedule:
    # any schedule whose terminal width equals the model's inference width;
    # forward() is evaluated at t = t_end so only that width matters
    return Schedule(s_start=model.inference_width * 2, s_end=model.inference_width, t_end=1)


def predict(x, model: RRBFModel) -> int:
    """Class of x under the terminal neighborhood width; lowest index on ties."""
    sched = _inference_sched(model)
    trace = forward(x, model, sched.t_end, sched)
    return int(np.argmax(trace.output))


def predict_batch(X, model: RRBFModel) -> np.ndarray:
    """Vectorized predict over the rows of X."""
    X = as_float_matrix(X)
    check_n_features(X, model.n_features)
    d2 = squared_distance_table(model.grid)
    preds = np.empty(len(X), dtype=np.int64)
    for i in range(len(X)):
        diff = X[i] - model.W
        I = (diff**2).sum(axis=1)
        win = int(np.argmin(I))
        hidden = np.exp(-d2[win] / model.inference_width) * np.exp(-np.minimum(I, EXP_CLAMP))
        preds[i] = int(np.argmax(_sigmoid(model.V.T @ hidden - model.theta)))
    return preds


def project(samples: LabeledDataset, model: RRBFModel) -> Projection2D:
    """Map each sample to the grid cell of its winner unit.

    Points lie on the integer grid; coincident points are kept, so the result
    preserves multiplicity.
    """
    X = as_float_matrix(samples.X)
    check_n_features(X, model.n_features)
    points = np.empty((len(X), 2))
    for i in range(len(X)):
        diff = X[i] - model.W
        win = int(np.argmin((diff**2).sum(axis=1)))
        points[i] = model.grid.coords(win)
    return Projection2D(points=points, labels=samples.y, source="crsom")


class RRBFClassifier(ClassifierMixin, BaseEstimator):
    """Grid-hidden-layer RBF classifier with a plottable 2-D internal map.

    Parameters
    ----------
    grid_rows, grid_cols : lattice of hidden units (default 10 x 10).
    epochs : training epochs, one shuffled pass over the data each.
    s_start, s_end : neighborhood width annealed geometrically between these.
    eta : learning rate for all parameter groups.
    input_scale : multiplier applied to inputs before the radial layer.
        "auto" uses 1/sqrt(n_features), which keeps squared distances O(1)
        regardless of input width so the exponential units stay responsive.
    seed : seed for initialization and epoch shuffles.

    After fit: model_, train_trace_, classes_, input_scale_, n_features_in_.
    transform(X) returns the (n, 2) winner-cell coordinates, so the estimator
    drops into pipelines as a supervised 2-D reducer.
    """

    def __init__(
        self,
        grid_rows=10,
        grid_cols=10,
        epochs=500,
        s_start=50.0,
        s_end=0.01,
        eta=0.1,
        input_scale="auto",
        seed=0,
    ):
        self.grid_rows = grid_rows
        self.grid_cols = grid_cols
        self.epochs = epochs
        self.s_start = s_start
        self.s_end = s_end
        self.eta = eta
        self.input_scale = input_scale
        self.seed = seed
        self.model_ = None

    def _resolve_scale(self, n_features: int) -> float:
        if self.input_scale == "auto":
            return 1.0 / np.sqrt(n_features)
        scale = float(self.input_scale)
        if scale <= 0:
            raise ValueError(f"input_scale must be positive, got {scale}")
        return scale

    def fit(self, X, y):
        X = as_float_matrix(X)
        y = as_label_vector(y)
        check_same_length(X, y)
        self.classes_, y_enc = np.unique(y, return_inverse=True)
        self.n_features_in_ = X.shape[1]
        self.input_scale_ = self._resolve_scale(X.shape[1])
        self.schedule_ = Schedule(
            s_start=self.s_start,
            s_end=self.s_end,
            t_end=int(self.epochs),
            eta=self.eta,
            seed=int(self.seed),
        )
        grid = GridSpec(int(self.grid_rows), int(self.grid_cols))
        train = LabeledDataset(X * self.input_scale_, y_enc, name="training")
        self.model_, self.train_trace_ = fit(train, grid, self.schedule_)
        return self

    def predict(self, X):
        check_fitted(self, "model_")
        X = as_float_matrix(X)
        check_n_features(X, self.n_features_in_)
        return self.classes_[predict_batch(X * self.input_scale_, self.model_)]

    def transform(self, X):
        """Winner-cell (row, col) coordinates for each sample."""
        check_fitted(self, "model_")
        X = as_float_matrix(X)
        check_n_features(X, self.n_features_in_)
        dummy = np.zeros(len(X), dtype=np.int64)
        ds = LabeledDataset(X * self.input_scale_, dummy, name="query")
        return project(ds, self.model_).points

    def crsom_projection(self, X, y=None) -> Projection2D:
        """Projection of X onto the trained map, labeled by y (or predictions)."""
        points = self.transform(X)
        if y is None:
            labels = np.searchsorted(self.classes_, self.predict(X))
        else:
            labels = as_label_vector(y)
        return Projection2D(points=points, labels=labels, source="crsom")
