"""Static figure export: scatter projections and curves as SVG plus
companion delimited data.

The writer emits a small SVG 1.1 subset (rect, circle, path, text, polyline)
with no timestamps or environment-dependent content, so identical inputs
produce byte-identical files. Every number a curve plots also lands in its
companion data file; the SVG is a rendering of that file, never an extra
source of values.
"""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .projection import Projection2D

__all__ = ["FigureSpec", "export_scatter", "export_curve", "write_projection_csv"]

# 13 colors x 2 shapes = 26 distinct class styles
_PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#ad494a",
    "#637939",
]
_MAX_CLASSES = 2 * len(_PALETTE)

_MARGIN_LEFT = 56
_MARGIN_RIGHT = 140
_MARGIN_TOP = 42
_MARGIN_BOTTOM = 48


@dataclass(frozen=True)
class FigureSpec:
    title: str = ""
    x_label: str = ""
    y_label: str = ""
    width: int = 640
    height: int = 480


def class_style(label: int):
    """Deterministic (color, shape) pair for a class index."""
    if not (0 <= label < _MAX_CLASSES):
        raise ValueError(f"class index {label} outside the {_MAX_CLASSES} supported styles")
    return _PALETTE[label % len(_PALETTE)], ("circle" if label < len(_PALETTE) else "square")


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _marker(x: float, y: float, radius: float, color: str, shape: str) -> str:
    if shape == "circle":
        return f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(radius)}" fill="{color}"/>'
    side = radius * 1.8
    return (
        f'<rect x="{_fmt(x - side / 2)}" y="{_fmt(y - side / 2)}" '
        f'width="{_fmt(side)}" height="{_fmt(side)}" fill="{color}"/>'
    )


class _Canvas:
    """Maps data coordinates onto the plot area and accumulates elements."""

    def __init__(self, spec: FigureSpec, x_range, y_range):
        self.spec = spec
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        self.px0 = _MARGIN_LEFT
        self.px1 = spec.width - _MARGIN_RIGHT
        self.py0 = _MARGIN_TOP
        self.py1 = spec.height - _MARGIN_BOTTOM
        self.elements: list[str] = []

    def x(self, v: float) -> float:
        span = self.x1 - self.x0
        frac = 0.5 if span == 0 else (v - self.x0) / span
        return self.px0 + frac * (self.px1 - self.px0)

    def y(self, v: float) -> float:
        span = self.y1 - self.y0
        frac = 0.5 if span == 0 else (v - self.y0) / span
        return self.py1 - frac * (self.py1 - self.py0)  # data y grows upward

    def chrome(self):
        s = self.spec
        self.elements.append(
            f'<rect x="{self.px0}" y="{self.py0}" width="{self.px1 - self.px0}" '
            f'height="{self.py1 - self.py0}" fill="none" stroke="#444444"/>'
        )
        if s.title:
            self.elements.append(
                f'<text x="{s.width // 2}" y="24" text-anchor="middle" '
                f'font-size="15" font-family="sans-serif">{escape(s.title)}</text>'
            )
        if s.x_label:
            self.elements.append(
                f'<text x="{(self.px0 + self.px1) // 2}" y="{s.height - 12}" '
                f'text-anchor="middle" font-size="12" font-family="sans-serif">'
                f"{escape(s.x_label)}</text>"
            )
        if s.y_label:
            cx, cy = 16, (self.py0 + self.py1) // 2
            self.elements.append(
                f'<text x="{cx}" y="{cy}" text-anchor="middle" font-size="12" '
                f'font-family="sans-serif" transform="rotate(-90 {cx} {cy})">'
                f"{escape(s.y_label)}</text>"
            )
        for value, px, anchor in (
            (self.x0, self.px0, "start"),
            (self.x1, self.px1, "end"),
        ):
            self.elements.append(
                f'<text x="{px}" y="{self.py1 + 16}" text-anchor="{anchor}" '
                f'font-size="10" font-family="sans-serif">{_fmt(value)}</text>'
            )
        for value, py in ((self.y0, self.py1), (self.y1, self.py0 + 8)):
            self.elements.append(
                f'<text x="{self.px0 - 6}" y="{py}" text-anchor="end" '
                f'font-size="10" font-family="sans-serif">{_fmt(value)}</text>'
            )

    def legend(self, classes, names):
        rows = [f'<g id="legend">']
        for i, label in enumerate(classes):
            color, shape = class_style(int(label))
            ly = self.py0 + 14 + 18 * i
            lx = self.px1 + 16
            rows.append(_marker(lx, ly - 3, 4.0, color, shape))
            text = names[label] if names and label < len(names) else str(label)
            rows.append(
                f'<text x="{lx + 10}" y="{ly}" font-size="11" '
                f'font-family="sans-serif">{escape(str(text))}</text>'
            )
        rows.append("</g>")
        self.elements.extend(rows)

    def render(self) -> str:
        s = self.spec
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{s.width}" '
            f'height="{s.height}" viewBox="0 0 {s.width} {s.height}">'
        )
        return head + "\n" + "\n".join(self.elements) + "\n</svg>\n"


def _padded_range(values: np.ndarray):
    lo, hi = float(values.min()), float(values.max())
    pad = 0.05 * (hi - lo)
    if pad == 0:
        pad = 0.5 if hi == 0 else abs(hi) * 0.05
    return lo - pad, hi + pad


def export_scatter(projection: Projection2D, spec: FigureSpec, path, class_names=None):
    """Write a 2-D class-colored scatter of the projection as SVG.

    Map projections (source "crsom") land on the integer grid; coincident
    samples of a class collapse into one marker whose radius grows with the
    square root of the multiplicity, which keeps dense cells visible.
    """
    if len(projection) == 0:
        raise ValueError("cannot plot an empty projection")
    pts, labels = projection.points, projection.labels
    classes = np.unique(labels)

    if projection.source == "crsom":
        x_range = (pts[:, 0].min() - 0.5, pts[:, 0].max() + 0.5)
        y_range = (pts[:, 1].min() - 0.5, pts[:, 1].max() + 0.5)
    else:
        x_range = _padded_range(pts[:, 0])
        y_range = _padded_range(pts[:, 1])
    canvas = _Canvas(spec, x_range, y_range)
    canvas.chrome()

    markers = ['<g id="points">']
    if projection.source == "crsom":
        cells: dict = {}
        for (u, v), label in zip(pts, labels):
            key = (float(u), float(v), int(label))
            cells[key] = cells.get(key, 0) + 1
        for (u, v, label), count in sorted(cells.items()):
            color, shape = class_style(label)
            radius = min(3.0 * np.sqrt(count), 13.0)
            markers.append(_marker(canvas.x(u), canvas.y(v), radius, color, shape))
    else:
        for (u, v), label in zip(pts, labels):
            color, shape = class_style(int(label))
            markers.append(_marker(canvas.x(u), canvas.y(v), 3.5, color, shape))
    markers.append("</g>")
    canvas.elements.extend(markers)
    canvas.legend(classes, class_names)

    with open(path, "w", encoding="utf-8") as f:
        f.write(canvas.render())


def export_curve(series, spec: FigureSpec, path, data_path=None):
    """Write an x/y curve (optional stderr whiskers) as SVG plus a companion
    CSV holding exactly the plotted values. x must be strictly increasing."""
    rows = []
    for entry in series:
        if len(entry) == 2:
            x, y = entry
            err = None
        else:
            x, y, err = entry
        rows.append((float(x), float(y), None if err is None else float(err)))
    if not rows:
        raise ValueError("cannot plot an empty series")
    xs = np.array([r[0] for r in rows])
    if len(xs) > 1 and not (np.diff(xs) > 0).all():
        raise ValueError("x values must be strictly increasing")
    ys = np.array([r[1] for r in rows])
    lo = [r[1] - r[2] for r in rows if r[2] is not None]
    hi = [r[1] + r[2] for r in rows if r[2] is not None]
    y_all = np.concatenate([ys, np.array(lo + hi)]) if lo else ys

    if data_path is None:
        base = str(path)
        data_path = (base[: -len(".svg")] if base.endswith(".svg") else base) + ".csv"
    with open(data_path, "w", encoding="utf-8") as f:
        f.write("x,y,stderr\n")
        for x, y, err in rows:
            tail = "" if err is None else f"{err:.17g}"
            f.write(f"{x:.17g},{y:.17g},{tail}\n")

    canvas = _Canvas(spec, _padded_range(xs), _padded_range(y_all))
    canvas.chrome()
    points = " ".join(f"{_fmt(canvas.x(x))},{_fmt(canvas.y(y))}" for x, y, _ in rows)
    canvas.elements.append(
        f'<polyline points="{points}" fill="none" stroke="{_PALETTE[0]}" stroke-width="1.5"/>'
    )
    whiskers = ['<g id="whiskers">']
    for x, y, err in rows:
        if err is None:
            continue
        px = canvas.x(x)
        whiskers.append(
            f'<path d="M {_fmt(px)} {_fmt(canvas.y(y - err))} '
            f'L {_fmt(px)} {_fmt(canvas.y(y + err))}" stroke="{_PALETTE[0]}" '
            f'stroke-width="1" fill="none"/>'
        )
    whiskers.append("</g>")
    canvas.elements.extend(whiskers)
    dots = ['<g id="points">']
    for x, y, _ in rows:
        dots.append(_marker(canvas.x(x), canvas.y(y), 2.0, _PALETTE[0], "circle"))
    dots.append("</g>")
    canvas.elements.extend(dots)

    with open(path, "w", encoding="utf-8") as f:
        f.write(canvas.render())
    return data_path


def write_projection_csv(projection: Projection2D, path):
    """Companion coordinates file: u, v, label per projected sample."""
    with open(path, "w", encoding="utf-8") as f:
        f.write("u,v,label\n")
        for (u, v), label in zip(projection.points, projection.labels):
            f.write(f"{u:.17g},{v:.17g},{int(label)}\n")
