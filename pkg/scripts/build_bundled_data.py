"""Maintainer script: regenerate the bundled dataset files under src/rrbf/data.

Provenance:
  iris.csv     classic UCI iris measurements, copied out of scikit-learn's
               bundled dataset (4 features, 3 classes, 150 rows).
  wine.csv     UCI wine chemical analysis, copied out of scikit-learn's
               bundled dataset (13 features, 3 classes, 178 rows).
  balance.csv  the balance-scale set is a complete factorial design and is
               regenerated exactly: every (left-weight, left-distance,
               right-weight, right-distance) in {1..5}^4, labeled by torque
               comparison (L / B / R).
  mnist-*.gz   10000 MNIST training digits repackaged into the standard IDX
               layout from the npm package "mnist" (cazala/mnist, MIT), which
               distributes them as per-class JSON. Pixel bytes recover the
               original 0..255 values exactly (the JSON stores round(p/255, 3)
               and |round(v*255) - p| < 0.5 for every pixel).

The thyroid screening file is not redistributed; see the package README for
how to supply it.

Usage: python scripts/build_bundled_data.py [--mnist-json-dir DIR]
"""

import argparse
import gzip
import json
import struct
from pathlib import Path

import numpy as np

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "rrbf" / "data"


def write_iris():
    from sklearn.datasets import load_iris

    bunch = load_iris()
    header = ["sepal_length", "sepal_width", "petal_length", "petal_width", "class"]
    lines = [",".join(header)]
    for row, target in zip(bunch.data, bunch.target):
        name = bunch.target_names[target]
        lines.append(",".join(f"{v:g}" for v in row) + f",{name}")
    (DATA_DIR / "iris.csv").write_text("\n".join(lines) + "\n")
    print(f"iris.csv: {len(lines) - 1} rows")


def write_wine():
    from sklearn.datasets import load_wine

    bunch = load_wine()
    header = [name.replace("/", "_") for name in bunch.feature_names] + ["class"]
    lines = [",".join(header)]
    for row, target in zip(bunch.data, bunch.target):
        lines.append(",".join(f"{v:g}" for v in row) + f",{bunch.target_names[target]}")
    (DATA_DIR / "wine.csv").write_text("\n".join(lines) + "\n")
    print(f"wine.csv: {len(lines) - 1} rows")


def write_balance():
    header = ["left_weight", "left_distance", "right_weight", "right_distance", "class"]
    lines = [",".join(header)]
    for lw in range(1, 6):
        for ld in range(1, 6):
            for rw in range(1, 6):
                for rd in range(1, 6):
                    left, right = lw * ld, rw * rd
                    label = "B" if left == right else ("L" if left > right else "R")
                    lines.append(f"{lw},{ld},{rw},{rd},{label}")
    (DATA_DIR / "balance.csv").write_text("\n".join(lines) + "\n")
    print(f"balance.csv: {len(lines) - 1} rows")


def write_mnist(json_dir: Path):
    images = []
    labels = []
    for digit in range(10):
        payload = json.loads((json_dir / f"{digit}.json").read_text())["data"]
        arr = np.asarray(payload, dtype=np.float64).reshape(-1, 784)
        pixels = np.round(arr * 255).astype(np.uint8)
        recovered = np.round(pixels / 255.0, 3)
        if not np.array_equal(recovered, np.round(arr, 3)):
            raise SystemExit(f"digit {digit}: pixel bytes do not round-trip")
        images.append(pixels)
        labels.append(np.full(len(pixels), digit, dtype=np.uint8))
    X = np.vstack(images)
    y = np.concatenate(labels)
    print(f"mnist: {len(X)} digits, per class {np.bincount(y)}")

    img_blob = struct.pack(">IIII", 0x00000803, len(X), 28, 28) + X.tobytes()
    lab_blob = struct.pack(">II", 0x00000801, len(y)) + y.tobytes()
    # mtime=0 keeps the gzip output reproducible
    with open(DATA_DIR / "mnist-images.idx3-ubyte.gz", "wb") as f:
        with gzip.GzipFile(fileobj=f, mode="wb", mtime=0) as gz:
            gz.write(img_blob)
    with open(DATA_DIR / "mnist-labels.idx1-ubyte.gz", "wb") as f:
        with gzip.GzipFile(fileobj=f, mode="wb", mtime=0) as gz:
            gz.write(lab_blob)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--mnist-json-dir", type=Path, default=None,
                        help="directory with 0.json .. 9.json from the npm mnist package")
    args = parser.parse_args()
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    write_iris()
    write_wine()
    write_balance()
    if args.mnist_json_dir:
        write_mnist(args.mnist_json_dir)
    else:
        print("mnist skipped (no --mnist-json-dir)")


if __name__ == "__main__":
    main()
