"""Command-line behavior: outputs, exit codes, replayability."""

import json
import os

import numpy as np
import pytest

from rrbf.cli import main


def run(argv):
    return main(argv)


def write_toy_csv(path, n=40, seed=0):
    rng = np.random.default_rng(seed)
    lines = []
    for i in range(n):
        label = i % 2
        x = rng.normal(3.0 * label, 0.5, 3)
        lines.append(",".join(f"{v:.6f}" for v in x) + f",c{label}")
    path.write_text("\n".join(lines) + "\n")
    return path


def tree_bytes(root):
    out = {}
    for base, _, files in os.walk(root):
        for name in files:
            full = os.path.join(base, name)
            out[os.path.relpath(full, root)] = open(full, "rb").read()
    return out


class TestTrain:
    def test_smoke_on_bundled_iris(self, tmp_path, capsys):
        out = tmp_path / "run"
        assert run(["train", "--data", "iris", "--epochs", "30",
                    "--seed", "1", "--out", str(out)]) == 0
        for name in ("model.rrbf", "learning_curve.svg", "learning_curve.csv", "manifest.json"):
            assert (out / name).is_file()
        assert "final training error" in capsys.readouterr().out
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "train"
        assert manifest["settings"]["epochs"] == 30

    def test_curve_has_one_row_per_epoch(self, tmp_path):
        out = tmp_path / "run"
        assert run(["train", "--data", "iris", "--epochs", "25",
                    "--seed", "0", "--out", str(out)]) == 0
        rows = (out / "learning_curve.csv").read_text().splitlines()
        assert len(rows) == 26  # header + 25 epochs

    def test_omitted_flags_use_standard_defaults(self, tmp_path):
        out = tmp_path / "run"
        assert run(["train", "--data", "iris", "--out", str(out)]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        settings = manifest["settings"]
        assert settings["grid"] == [10, 10]
        assert settings["epochs"] == 500
        assert settings["s_start"] == 50.0
        assert settings["s_end"] == 0.01
        # one curve row per default epoch
        rows = (out / "learning_curve.csv").read_text().splitlines()
        assert len(rows) == 501

    def test_zero_epochs_is_usage_error(self, tmp_path, capsys):
        assert run(["train", "--data", "iris", "--epochs", "0",
                    "--out", str(tmp_path)]) == 2

    def test_missing_file_is_data_error(self, tmp_path):
        assert run(["train", "--data", str(tmp_path / "nope.csv"),
                    "--out", str(tmp_path / "o")]) == 3

    def test_unparseable_file_is_data_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("1,2,a\n1,x,b\n")
        assert run(["train", "--data", str(bad), "--epochs", "5",
                    "--out", str(tmp_path / "o")]) == 3

    def test_bad_grid_is_usage_error(self, tmp_path):
        assert run(["train", "--data", "iris", "--grid", "tenbyten",
                    "--out", str(tmp_path)]) == 2

    def test_input_files_not_mutated(self, tmp_path):
        csv = write_toy_csv(tmp_path / "toy.csv")
        before = csv.read_bytes()
        assert run(["train", "--data", str(csv), "--epochs", "10",
                    "--grid", "3x3", "--out", str(tmp_path / "o")]) == 0
        assert csv.read_bytes() == before


class TestCompare:
    def test_full_method_set_outputs(self, tmp_path, capsys):
        out = tmp_path / "cmp"
        rc = run(["compare", "--data", "iris", "--epochs", "30", "--folds", "5",
                  "--seed", "2", "--out", str(out)])
        assert rc == 0
        report = (out / "report.csv").read_text().splitlines()
        assert report[0] == "dataset,rrbf,pca_knn,lda_knn,knn_raw"
        assert report[1].startswith("iris,")
        # four cells in the row
        assert len(report[1].split(",")) == 5
        for tag in ("crsom", "pca", "lda"):
            assert (out / f"scatter_{tag}.svg").is_file()
            assert (out / f"scatter_{tag}.csv").is_file()
        assert not (out / "scatter_knn.svg").exists()

    def test_cell_format_one_decimal(self, tmp_path):
        out = tmp_path / "cmp"
        run(["compare", "--data", "iris", "--method", "knn_raw", "--folds", "5",
             "--seed", "0", "--out", str(out)])
        cell = (out / "report.csv").read_text().splitlines()[1].split(",")[1]
        import re

        assert re.fullmatch(r"\d+\.\d \(\d+\.\d\)", cell)

    def test_lda_dim_bound_is_config_error(self, tmp_path, capsys):
        rc = run(["compare", "--data", "iris", "--method", "lda_knn", "--dim", "3",
                  "--folds", "5", "--out", str(tmp_path / "o")])
        assert rc == 2
        assert "lda_knn" in capsys.readouterr().err

    def test_replay_is_byte_identical(self, tmp_path):
        args = ["compare", "--data", "iris", "--epochs", "20", "--folds", "4",
                "--seed", "3"]
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(args + ["--out", str(a)]) == 0
        assert run(args + ["--out", str(b)]) == 0
        ta, tb = tree_bytes(a), tree_bytes(b)
        assert ta.keys() == tb.keys()
        for name in ta:
            assert ta[name] == tb[name], name

    def test_seed_changes_report(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        base = ["compare", "--data", "iris", "--method", "rrbf", "--epochs", "20",
                "--folds", "4"]
        run(base + ["--seed", "1", "--out", str(a)])
        run(base + ["--seed", "2", "--out", str(b)])
        assert (a / "report.csv").read_text() != (b / "report.csv").read_text()


class TestProject:
    def test_model_projection_row_count(self, tmp_path):
        train_out = tmp_path / "train"
        assert run(["train", "--data", "iris", "--epochs", "30", "--seed", "1",
                    "--out", str(train_out)]) == 0
        proj_out = tmp_path / "proj"
        assert run(["project", "--artifact", str(train_out / "model.rrbf"),
                    "--data", "iris", "--out", str(proj_out)]) == 0
        rows = (proj_out / "projection.csv").read_text().splitlines()
        assert rows[0] == "u,v,label"
        assert len(rows) == 151

    def test_corrupted_artifact_is_data_error(self, tmp_path):
        bad = tmp_path / "model.rrbf"
        bad.write_text("rrbf-model v1\ngrid oops\n")
        assert run(["project", "--artifact", str(bad), "--data", "iris",
                    "--out", str(tmp_path / "o")]) == 3

    def test_unrecognized_artifact_is_data_error(self, tmp_path):
        bad = tmp_path / "whatever.txt"
        bad.write_text("hello\n")
        assert run(["project", "--artifact", str(bad), "--data", "iris",
                    "--out", str(tmp_path / "o")]) == 3

    def test_dimension_mismatch_is_config_error(self, tmp_path):
        train_out = tmp_path / "train"
        csv = write_toy_csv(tmp_path / "toy.csv")  # 3 features
        assert run(["train", "--data", str(csv), "--epochs", "10", "--grid", "3x3",
                    "--out", str(train_out)]) == 0
        rc = run(["project", "--artifact", str(train_out / "model.rrbf"),
                  "--data", "iris", "--out", str(tmp_path / "o")])
        assert rc == 2


class TestParser:
    def test_unknown_command_exits_2(self):
        assert run(["frobnicate"]) == 2

    def test_version_flag(self, capsys):
        assert run(["--version"]) == 0
