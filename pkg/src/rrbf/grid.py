"""Grid geometry, annealing schedule, and teacher encoding.

Hidden neurons sit on a rows x cols lattice. Neuron index j maps to the cell
(j // cols, j % cols); distances between neurons are squared Euclidean in
those integer coordinates, which is what the exponential neighborhood expects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GridSpec",
    "Schedule",
    "grid_distance",
    "squared_distance_table",
    "neighborhood_width",
    "neighborhood_coeff",
    "one_hot",
]


@dataclass(frozen=True)
class GridSpec:
    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.rows}x{self.cols}")

    @property
    def size(self) -> int:
        return self.rows * self.cols

    def coords(self, j: int) -> tuple[int, int]:
        """Cell (row, col) of neuron j."""
        self._check_index(j)
        return j // self.cols, j % self.cols

    def index(self, row: int, col: int) -> int:
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise ValueError(f"cell ({row}, {col}) outside {self.rows}x{self.cols} grid")
        return row * self.cols + col

    def coord_array(self) -> np.ndarray:
        """(size, 2) float array of all cell coordinates, in index order."""
        r, c = np.divmod(np.arange(self.size), self.cols)
        return np.column_stack([r, c]).astype(np.float64)

    def _check_index(self, j: int):
        if not (0 <= j < self.size):
            raise ValueError(f"neuron index {j} outside grid of size {self.size}")


@dataclass(frozen=True)
class Schedule:
    """Training schedule: neighborhood width anneals geometrically from
    s_start to s_end over t_end epochs; eta is the learning rate."""

    s_start: float = 50.0
    s_end: float = 0.01
    t_end: int = 500
    eta: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not (self.s_start > self.s_end > 0):
            raise ValueError(
                f"need s_start > s_end > 0, got s_start={self.s_start}, s_end={self.s_end}"
            )
        if self.t_end < 1:
            raise ValueError(f"t_end must be >= 1, got {self.t_end}")
        if self.eta <= 0:
            raise ValueError(f"eta must be positive, got {self.eta}")


def grid_distance(a: int, b: int, grid: GridSpec) -> float:
    """Squared Euclidean distance between the grid cells of neurons a and b."""
    ra, ca = grid.coords(a)
    rb, cb = grid.coords(b)
    return float((ra - rb) ** 2 + (ca - cb) ** 2)


def squared_distance_table(grid: GridSpec) -> np.ndarray:
    """(size, size) table of pairwise squared grid distances."""
    xy = grid.coord_array()
    diff = xy[:, None, :] - xy[None, :, :]
    return (diff**2).sum(axis=2)


def neighborhood_width(t: float, sched: Schedule) -> float:
    """Width S(t), interpolated geometrically between s_start and s_end.

    Endpoints are returned exactly (the power form is used strictly inside the
    interval); t past t_end clamps to s_end, which is also the width used at
    inference time.
    """
    if t < 0:
        raise ValueError(f"epoch must be non-negative, got {t}")
    if t == 0:
        return sched.s_start
    if t >= sched.t_end:
        return sched.s_end
    return sched.s_start * (sched.s_end / sched.s_start) ** (t / sched.t_end)


def neighborhood_coeff(win: int, j: int, t: float, grid: GridSpec, sched: Schedule) -> float:
    """Influence of the winner on neuron j: exp(-dist(win, j) / S(t)), in (0, 1]."""
    return float(np.exp(-grid_distance(win, j, grid) / neighborhood_width(t, sched)))


def one_hot(label: int, n_classes: int) -> np.ndarray:
    """Teacher vector: 1.0 at the true class, 0.0 elsewhere."""
    if not (0 <= label < n_classes):
        raise ValueError(f"label {label} outside [0, {n_classes})")
    v = np.zeros(n_classes)
    v[label] = 1.0
    return v
