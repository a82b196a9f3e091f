"""Complete weighted market graph built from return correlations.

Edge weights go through two transforms: the correlation distance
``d = sqrt(2 (1 - rho))`` and the bounded dissimilarity
``delta = 1 - exp(-d / 2)`` that feeds the K-medoid QUBO.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DegenerateSeriesError, MalformedInputError, ValidationError
from .ingest import ReturnsPanel

RHO_TOLERANCE = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MarketGraph:
    assets: tuple[str, ...]
    rho: np.ndarray
    dist: np.ndarray
    delta: np.ndarray
    fit_window: tuple[np.datetime64, np.datetime64]

    def __post_init__(self):
        object.__setattr__(self, "assets", tuple(self.assets))
        for name in ("rho", "dist", "delta"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))

    @property
    def n(self) -> int:
        return len(self.assets)


def pearson_correlation(panel: ReturnsPanel) -> np.ndarray:
    """Sample Pearson correlation matrix of the panel's asset return series.

    The diagonal is set to exactly 1 and the matrix is symmetrised so that
    downstream transforms see exact zeros on the diagonal.
    """
    x = np.asarray(panel.returns, dtype=float)
    if x.shape[1] < 2:
        raise DegenerateSeriesError(f"need at least 2 dates for a correlation, got {x.shape[1]}")
    centered = x - x.mean(axis=1, keepdims=True)
    ss = np.einsum("ij,ij->i", centered, centered)
    # relative test so tiny floating residue of a constant series still counts as zero
    scale = np.einsum("ij,ij->i", x, x)
    flat = ss <= 1e-28 * np.maximum(scale, 1e-300)
    if flat.any():
        name = panel.assets[int(np.argmax(flat))]
        raise DegenerateSeriesError(f"asset {name} has zero return variance")
    normed = centered / np.sqrt(ss)[:, None]
    rho = normed @ normed.T
    rho = 0.5 * (rho + rho.T)
    np.fill_diagonal(rho, 1.0)
    return np.clip(rho, -1.0, 1.0)


def _check_square_symmetric(m: np.ndarray, what: str) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"{what} must be a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{what} has non-finite entries")
    if not np.allclose(m, m.T, rtol=0, atol=1e-12):
        raise ValidationError(f"{what} is not symmetric")
    return m


def distance_from_correlation(rho) -> np.ndarray:
    """``d_ij = sqrt(2 (1 - rho_ij))``, accepting scalars or arrays.

    Entries within ``1e-9`` outside ``[-1, 1]`` are clamped; anything further
    out is rejected.
    """
    rho = np.asarray(rho, dtype=float)
    if not np.all(np.isfinite(rho)) or np.any(np.abs(rho) > 1 + RHO_TOLERANCE):
        raise ValidationError("correlation entries must lie in [-1, 1]")
    d = np.sqrt(2.0 * (1.0 - np.clip(rho, -1.0, 1.0)))
    if d.ndim == 2:
        _check_square_symmetric(rho, "correlation matrix")
        np.fill_diagonal(d, 0.0)
    return d


def robust_delta(dist) -> np.ndarray:
    """``delta_ij = 1 - exp(-d_ij / 2)``, range ``[0, 1 - 1/e]`` for ``d`` in ``[0, 2]``."""
    dist = np.asarray(dist, dtype=float)
    if not np.all(np.isfinite(dist)):
        raise ValidationError("distance matrix has non-finite entries")
    if np.any(dist < 0):
        raise ValidationError("distances must be non-negative")
    # expm1 keeps full relative precision for small distances
    delta = -np.expm1(-0.5 * dist)
    if delta.ndim == 2:
        _check_square_symmetric(dist, "distance matrix")
        np.fill_diagonal(delta, 0.0)
    return delta


def build_market_graph(panel: ReturnsPanel) -> MarketGraph:
    rho = pearson_correlation(panel)
    dist = distance_from_correlation(rho)
    delta = robust_delta(dist)
    return MarketGraph(panel.assets, rho, dist, delta, panel.window)


def write_matrix_csv(matrix: np.ndarray, labels: Sequence[str], path: str | Path) -> None:
    """Square matrix as CSV with ticker row/column headers; exact float round-trip."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["", *labels])
        for label, row in zip(labels, matrix):
            writer.writerow([label, *(repr(float(v)) for v in row)])


def read_matrix_csv(path: str | Path) -> tuple[tuple[str, ...], np.ndarray]:
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise MalformedInputError(f"{path}:1: empty matrix file")
    labels = tuple(h.strip() for h in rows[0][1:])
    if len(rows) - 1 != len(labels):
        raise MalformedInputError(f"{path}: matrix has {len(rows) - 1} rows but {len(labels)} columns")
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(labels) + 1:
            raise MalformedInputError(f"{path}:{lineno}: expected {len(labels) + 1} fields")
        if row[0].strip() != labels[lineno - 2]:
            raise MalformedInputError(f"{path}:{lineno}: row label {row[0]!r} does not match column order")
        try:
            values.append([float(v) for v in row[1:]])
        except ValueError:
            raise MalformedInputError(f"{path}:{lineno}: bad matrix entry") from None
    return labels, np.array(values, dtype=float).reshape(len(labels), len(labels))
