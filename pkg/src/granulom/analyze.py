"""Principal component analysis and 2-D scatter exports.

The eigensolver is a cyclic Jacobi iteration on the sample covariance
matrix (divisor n-1). Component signs are canonicalized so the largest-
magnitude coordinate is positive, keeping exports reproducible. Scatter
data can come from the first two principal components or from any pair
of raw features, and is written as CSV plus an optional self-contained
SVG plot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DataError
from .features import Dataset

__all__ = [
    "PcaModel",
    "ScatterRow",
    "jacobi_eigh",
    "fit_pca",
    "transform",
    "project",
    "feature_pair_rows",
    "export_scatter",
    "read_scatter_csv",
]


def jacobi_eigh(matrix, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors); eigenvectors are columns. Sweeps
    run until the off-diagonal Frobenius norm drops below 1e-12 relative
    to the matrix norm.
    """
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DataError("jacobi_eigh needs a square matrix")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-10 * max(1.0, float(np.abs(a).max()))):
        raise DataError("jacobi_eigh needs a symmetric matrix")
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), v
    tol = 1e-12 * max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        off = math.sqrt(max(0.0, float((a * a).sum() - (a.diagonal() ** 2).sum())))
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                h = a[q, q] - a[p, p]
                if abs(h) > 1e150 * abs(apq):
                    t = apq / h  # limiting tangent; avoids overflow in theta
                else:
                    theta = h / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (
                        abs(theta) + math.sqrt(theta * theta + 1.0)
                    )
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
    return a.diagonal().copy(), v


@dataclass(frozen=True, eq=False)
class PcaModel:
    mean: np.ndarray  # (n_features,)
    components: np.ndarray  # (n_components, n_features), orthonormal rows
    eigenvalues: np.ndarray  # (n_components,), descending, non-negative
    scale: np.ndarray | None = None  # per-feature divisor when fitted on correlations

    @property
    def n_components(self) -> int:
        return self.components.shape[0]


def fit_pca(ds: Dataset, n_components: int = 2, correlation: bool = False) -> PcaModel:
    """Top principal components of the dataset's covariance (divisor n-1).

    With correlation=True the features are standardized first (zero-variance
    columns are left unscaled), i.e. the correlation matrix is decomposed.
    """
    n, d = ds.n_samples, ds.n_features
    if n < 2:
        raise DataError("PCA needs at least 2 samples")
    if not 1 <= n_components <= min(n - 1, d):
        raise DataError(
            f"n_components must lie in [1, {min(n - 1, d)}], got {n_components}"
        )
    mean = ds.matrix.mean(axis=0)
    centered = ds.matrix - mean
    scale = None
    if correlation:
        scale = np.where(centered.std(axis=0, ddof=1) == 0.0, 1.0, centered.std(axis=0, ddof=1))
        centered = centered / scale
    cov = centered.T @ centered / (n - 1)
    eigenvalues, vectors = jacobi_eigh(cov)

    order = np.argsort(-eigenvalues, kind="stable")[:n_components]
    values = eigenvalues[order]
    floor = -1e-9 * max(1.0, float(np.trace(cov)))
    if values.min() < floor:
        raise DataError("covariance produced a significantly negative eigenvalue")
    values = np.maximum(values, 0.0)

    comps = vectors[:, order].T.copy()
    for row in comps:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    return PcaModel(mean, comps, values, scale)


def transform(model: PcaModel, matrix) -> np.ndarray:
    """Scores of each row on every retained component."""
    x = np.asarray(matrix, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != model.mean.size:
        raise DataError("feature count does not match the fitted model")
    centered = x - model.mean
    if model.scale is not None:
        centered = centered / model.scale
    scores = centered @ model.components.T
    return scores[0] if single else scores


class ScatterRow(NamedTuple):
    sample_id: str
    label: str
    x: float
    y: float


def project(model: PcaModel, ds: Dataset) -> list[ScatterRow]:
    """Scatter rows on the first two principal components."""
    if model.n_components < 2:
        raise DataError("projection needs a model with at least 2 components")
    scores = transform(model, ds.matrix)
    return [
        ScatterRow(sid, lab, float(scores[i, 0]), float(scores[i, 1]))
        for i, (sid, lab) in enumerate(zip(ds.sample_ids, ds.labels))
    ]


def feature_pair_rows(ds: Dataset, i: int, j: int) -> list[ScatterRow]:
    """Scatter rows from two raw features, 1-based indices."""
    for idx in (i, j):
        if not 1 <= idx <= ds.n_features:
            raise DataError(f"feature index {idx} outside 1..{ds.n_features}")
    return [
        ScatterRow(sid, lab, float(ds.matrix[r, i - 1]), float(ds.matrix[r, j - 1]))
        for r, (sid, lab) in enumerate(zip(ds.sample_ids, ds.labels))
    ]


_GLYPHS = ("circle", "square", "triangle", "diamond", "cross", "plus", "ring")
_COLOURS = ("#1f60a8", "#c23b22", "#2e8540", "#8031a7", "#b8860b", "#0d7a7a", "#555555")


def _glyph_svg(shape: str, x: float, y: float, colour: str) -> str:
    r = 4.0
    if shape == "circle":
        return f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r:.1f}" fill="{colour}"/>'
    if shape == "ring":
        return (
            f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r:.1f}" fill="none" '
            f'stroke="{colour}" stroke-width="1.5"/>'
        )
    if shape == "square":
        return (
            f'<rect x="{x - r:.2f}" y="{y - r:.2f}" width="{2 * r:.1f}" '
            f'height="{2 * r:.1f}" fill="{colour}"/>'
        )
    if shape == "triangle":
        pts = f"{x:.2f},{y - r:.2f} {x - r:.2f},{y + r:.2f} {x + r:.2f},{y + r:.2f}"
        return f'<polygon points="{pts}" fill="{colour}"/>'
    if shape == "diamond":
        pts = f"{x:.2f},{y - r:.2f} {x + r:.2f},{y:.2f} {x:.2f},{y + r:.2f} {x - r:.2f},{y:.2f}"
        return f'<polygon points="{pts}" fill="{colour}"/>'
    if shape == "cross":
        return (
            f'<path d="M {x - r:.2f} {y - r:.2f} L {x + r:.2f} {y + r:.2f} '
            f'M {x - r:.2f} {y + r:.2f} L {x + r:.2f} {y - r:.2f}" '
            f'stroke="{colour}" stroke-width="1.5"/>'
        )
    return (
        f'<path d="M {x - r:.2f} {y:.2f} L {x + r:.2f} {y:.2f} '
        f'M {x:.2f} {y - r:.2f} L {x:.2f} {y + r:.2f}" '
        f'stroke="{colour}" stroke-width="1.5"/>'
    )


def _scatter_svg(rows: Sequence[ScatterRow]) -> str:
    size, margin = 800.0, 70.0
    span = size - 2 * margin
    xs = [r.x for r in rows]
    ys = [r.y for r in rows]
    x0, x1 = (min(xs), max(xs)) if rows else (0.0, 1.0)
    y0, y1 = (min(ys), max(ys)) if rows else (0.0, 1.0)
    dx = (x1 - x0) or 1.0
    dy = (y1 - y0) or 1.0
    labels = sorted({r.label for r in rows})
    style = {
        lab: (_GLYPHS[i % len(_GLYPHS)], _COLOURS[i % len(_COLOURS)])
        for i, lab in enumerate(labels)
    }
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="800" height="800" '
        'viewBox="0 0 800 800">',
        '<rect width="800" height="800" fill="white"/>',
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" '
        'fill="none" stroke="#333"/>',
        f'<text x="{margin}" y="{size - margin + 20:.0f}" font-size="12">{x0:.4g}</text>',
        f'<text x="{size - margin:.0f}" y="{size - margin + 20:.0f}" font-size="12" '
        f'text-anchor="end">{x1:.4g}</text>',
        f'<text x="{margin - 6:.0f}" y="{size - margin:.0f}" font-size="12" '
        f'text-anchor="end">{y0:.4g}</text>',
        f'<text x="{margin - 6:.0f}" y="{margin + 6:.0f}" font-size="12" '
        f'text-anchor="end">{y1:.4g}</text>',
    ]
    for r in rows:
        px = margin + (r.x - x0) / dx * span
        py = size - margin - (r.y - y0) / dy * span
        shape, colour = style[r.label]
        parts.append(_glyph_svg(shape, px, py, colour))
    for i, lab in enumerate(labels):
        shape, colour = style[lab]
        ly = 20.0 + 16.0 * i
        parts.append(_glyph_svg(shape, 14.0, ly, colour))
        parts.append(f'<text x="26" y="{ly + 4:.0f}" font-size="12">{lab}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def export_scatter(rows: Sequence[ScatterRow], path, svg_path=None) -> None:
    """Write scatter rows as sample_id,label,x,y CSV (exact float round-trip)."""
    lines = ["sample_id,label,x,y"]
    lines += [f"{r.sample_id},{r.label},{float(r.x)!r},{float(r.y)!r}" for r in rows]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    if svg_path is not None:
        with open(svg_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(_scatter_svg(rows))


def read_scatter_csv(path) -> list[ScatterRow]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != "sample_id,label,x,y":
        raise DataError("not a scatter CSV")
    out = []
    for ln in lines[1:]:
        sid, lab, xs, ys = ln.split(",")
        out.append(ScatterRow(sid, lab, float(xs), float(ys)))
    return out
