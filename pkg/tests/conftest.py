"""Shared fixtures and instance generators for the test suite."""

import numpy as np
import pytest

from rrbf import GridSpec, LabeledDataset, Schedule, SeededStream
from rrbf.network import RRBFModel


def make_blobs(seed: int, n: int = 40, separation: float = 4.0) -> LabeledDataset:
    """Two well-separated 2-D Gaussian blobs, one per class."""
    stream = SeededStream(seed)
    half = n // 2
    a = stream.normal(0.0, 0.5, (half, 2))
    b = stream.normal(separation, 0.5, (n - half, 2))
    X = np.vstack([a, b])
    y = np.array([0] * half + [1] * (n - half))
    return LabeledDataset(X, y, name="two-blobs")


def random_instance(stream: SeededStream, min_winner_gap: float = 0.05):
    """A small random network state with one sample, for gradient tests.

    Reference vectors are scattered around the input so distances stay
    moderate; instances whose two smallest distances are closer than
    min_winner_gap are resampled so the winner is stable under the
    perturbations the tests apply.
    """
    while True:
        rows = int(stream.integers(1, 4))
        cols = int(stream.integers(1, 4))
        d = int(stream.integers(1, 6))
        k = int(stream.integers(2, 4))
        grid = GridSpec(rows, cols)
        x = stream.normal(0.0, 1.0, d)
        W = x + stream.normal(0.0, 0.6, (grid.size, d))
        V = stream.uniform(-1.0, 1.0, (grid.size, k))
        theta = stream.uniform(-0.5, 0.5, k)
        model = RRBFModel(W=W, V=V, theta=theta, grid=grid)
        I = ((x - W) ** 2).sum(axis=1)
        gaps = np.sort(I)
        if len(gaps) > 1 and gaps[1] - gaps[0] < min_winner_gap:
            continue
        sched = Schedule(s_start=5.0, s_end=0.5, t_end=10, eta=0.1, seed=0)
        t = int(stream.integers(0, sched.t_end + 1))
        label = int(stream.integers(0, k))
        target = np.zeros(k)
        target[label] = 1.0
        return model, x, target, t, sched


@pytest.fixture
def blobs():
    return make_blobs(seed=11)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = []
    for outcome in ("passed", "failed", "skipped"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", None) not in ("call", "setup"):
                continue
            if "acceptance" in getattr(rep, "keywords", {}):
                rows.append((rep.nodeid, outcome))
    if rows:
        terminalreporter.section("acceptance criteria")
        for nodeid, outcome in sorted(rows):
            terminalreporter.write_line(f"{outcome.upper():8s} {nodeid}")
