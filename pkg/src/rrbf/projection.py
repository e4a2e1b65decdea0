"""Two-dimensional projection results, the common currency of map and
baseline visual output."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Projection2D"]

_SOURCES = ("crsom", "pca", "lda")


@dataclass(frozen=True)
class Projection2D:
    """Per-sample (u, v) coordinates with class labels."""

    points: np.ndarray  # (n, 2) float
    labels: np.ndarray  # (n,) int
    source: str = "pca"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        labs = np.asarray(self.labels, dtype=np.int64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must be (n, 2), got {pts.shape}")
        if labs.shape != (pts.shape[0],):
            raise ValueError("labels must align with points")
        if self.source not in _SOURCES:
            raise ValueError(f"source must be one of {_SOURCES}, got {self.source!r}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labs)

    def __len__(self) -> int:
        return len(self.points)
