"""Round-trip exactness of the text serialization."""

import numpy as np
import pytest

from rrbf import (
    DataFormatError,
    GridSpec,
    LabeledDataset,
    Schedule,
    load_model,
    load_projector,
    pca_fit,
    lda_fit,
    save_model,
    save_projector,
)
from rrbf.dataset import fit_normalizer
from rrbf.network import RRBFClassifier, RRBFModel
from rrbf.persist import classifier_from_saved, save_classifier
from rrbf.rng import SeededStream


def random_model(seed=0, rows=3, cols=4, d=5, k=3):
    stream = SeededStream(seed)
    grid = GridSpec(rows, cols)
    return RRBFModel(
        W=stream.normal(0.0, 2.0, (grid.size, d)),
        V=stream.normal(0.0, 1.0, (grid.size, k)),
        theta=stream.normal(0.0, 0.5, k),
        grid=grid,
        inference_width=0.01,
    )


class TestModelRoundTrip:
    def test_value_exact(self, tmp_path):
        model = random_model(1)
        sched = Schedule(s_start=50.0, s_end=0.01, t_end=500, eta=0.1, seed=42)
        path = tmp_path / "model.rrbf"
        save_model(path, model, sched, input_scale=1 / np.sqrt(5), class_names=("a", "b", "c"))
        saved = load_model(path)
        assert np.array_equal(saved.model.W, model.W)
        assert np.array_equal(saved.model.V, model.V)
        assert np.array_equal(saved.model.theta, model.theta)
        assert saved.model.grid == model.grid
        assert saved.schedule == sched
        assert saved.input_scale == 1 / np.sqrt(5)
        assert saved.class_names == ("a", "b", "c")
        assert saved.normalizer is None

    def test_normalizer_block_round_trips(self, tmp_path):
        stream = SeededStream(2)
        X = stream.normal(3.0, 2.0, (20, 5))
        X[:, 3] = 9.0  # degenerate feature
        norm = fit_normalizer(X)
        model = random_model(3)
        path = tmp_path / "model.rrbf"
        save_model(path, model, Schedule(), normalizer=norm, class_names=("x", "y", "z"))
        saved = load_model(path)
        assert np.array_equal(saved.normalizer.mean, norm.mean)
        assert np.array_equal(saved.normalizer.scale, norm.scale)
        assert np.array_equal(saved.normalizer.active, norm.active)

    def test_extreme_values_survive(self, tmp_path):
        model = random_model(4)
        tweaked = RRBFModel(
            W=model.W * 1e-300,
            V=model.V * 1e300,
            theta=model.theta + np.pi,
            grid=model.grid,
            inference_width=model.inference_width,
        )
        path = tmp_path / "model.rrbf"
        save_model(path, tweaked, Schedule())
        saved = load_model(path)
        assert np.array_equal(saved.model.W, tweaked.W)
        assert np.array_equal(saved.model.V, tweaked.V)
        assert np.array_equal(saved.model.theta, tweaked.theta)

    def test_estimator_round_trip_predicts_identically(self, tmp_path, blobs=None):
        from conftest import make_blobs

        ds = make_blobs(5)
        clf = RRBFClassifier(grid_rows=4, grid_cols=4, epochs=50, seed=7).fit(ds.X, ds.y)
        path = tmp_path / "clf.rrbf"
        save_classifier(path, clf)
        restored = classifier_from_saved(load_model(path))
        assert np.array_equal(restored.predict(ds.X), clf.predict(ds.X))

    def test_corrupted_header_rejected(self, tmp_path):
        path = tmp_path / "bad.rrbf"
        path.write_text("rrbf-model v9\n")
        with pytest.raises(DataFormatError):
            load_model(path)

    def test_truncated_body_rejected(self, tmp_path):
        model = random_model(6)
        path = tmp_path / "model.rrbf"
        save_model(path, model, Schedule())
        clipped = path.read_text().splitlines()[:10]
        path.write_text("\n".join(clipped) + "\n")
        with pytest.raises(DataFormatError):
            load_model(path)

    def test_byte_identical_rewrites(self, tmp_path):
        model = random_model(7)
        a = tmp_path / "a.rrbf"
        b = tmp_path / "b.rrbf"
        save_model(a, model, Schedule())
        save_model(b, model, Schedule())
        assert a.read_bytes() == b.read_bytes()


class TestProjectorRoundTrip:
    def test_pca_value_exact(self, tmp_path):
        stream = SeededStream(8)
        X = stream.normal(0.0, 1.0, (30, 6))
        proj = pca_fit(X, 3)
        path = tmp_path / "proj.rrbf"
        save_projector(path, proj, class_names=("u", "v"))
        saved = load_projector(path)
        assert np.array_equal(saved.projector.mean, proj.mean)
        assert np.array_equal(saved.projector.basis, proj.basis)
        assert np.array_equal(saved.projector.values, proj.values)
        assert saved.projector.kind == "pca"
        assert saved.projector.degenerate == proj.degenerate

    def test_lda_round_trip(self, tmp_path):
        stream = SeededStream(9)
        X = stream.normal(0.0, 1.0, (40, 4))
        y = np.arange(40) % 2
        X[y == 1] += 2.5
        proj = lda_fit(LabeledDataset(X, y), 1)
        path = tmp_path / "lda.rrbf"
        save_projector(path, proj)
        saved = load_projector(path)
        assert np.array_equal(saved.projector.basis, proj.basis)
        assert saved.projector.kind == "lda"

    def test_wrong_tag_rejected(self, tmp_path):
        model = random_model(10)
        path = tmp_path / "model.rrbf"
        save_model(path, model, Schedule())
        with pytest.raises(DataFormatError):
            load_projector(path)
