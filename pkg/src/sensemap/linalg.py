"""Dense matrix primitives and the orthogonal Procrustes solver.

Vectors are stored as the *columns* of a ``(dim, count)`` float64 array, so a
map ``W`` acts as ``W @ X``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateVector, DimensionMismatch, SvdFailure

__all__ = [
    "EmbeddingMatrix",
    "OrthogonalMap",
    "frobenius_norm",
    "unit_normalize_columns",
    "solve_procrustes",
    "apply_map",
    "random_orthogonal",
]

NORM_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """A ``dim x count`` matrix of column vectors with optional column labels."""

    values: np.ndarray
    labels: Optional[tuple] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2:
            raise DimensionMismatch(f"expected a 2-d array, got ndim={values.ndim}")
        if values.shape[0] < 1:
            raise DimensionMismatch("dim must be positive")
        if not np.all(np.isfinite(values)):
            raise ValueError("embedding matrix contains NaN or Inf")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.labels is not None:
            labels = tuple(str(label) for label in self.labels)
            if len(labels) != values.shape[1]:
                raise DimensionMismatch(
                    f"{len(labels)} labels for {values.shape[1]} columns"
                )
            object.__setattr__(self, "labels", labels)

    @classmethod
    def from_rows(cls, rows, labels: Optional[Sequence[str]] = None, dim=None):
        """Build from an ``(n, dim)`` array of row vectors."""
        rows = np.asarray(rows, dtype=np.float64)
        if rows.size == 0 and dim is not None:
            rows = rows.reshape(0, dim)
        return cls(rows.T, None if labels is None else tuple(labels))

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def count(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    def column(self, i: int) -> np.ndarray:
        return self.values[:, i]

    def with_values(self, values) -> "EmbeddingMatrix":
        return EmbeddingMatrix(values, self.labels)


@dataclass(frozen=True, eq=False)
class OrthogonalMap:
    """Orthogonal ``W`` with the contract ``y ~ W @ x``.

    ``residual`` is ``||W X - Y||_F`` on the anchors it was fit on.
    """

    values: np.ndarray
    residual: float = 0.0

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise DimensionMismatch(f"W must be square, got shape {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if not (np.isfinite(self.residual) and self.residual >= 0):
            raise ValueError(f"residual must be finite and >= 0, got {self.residual}")

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def orthogonality_error(self) -> float:
        """Max-norm of ``W^T W - I``."""
        W = self.values
        return float(np.max(np.abs(W.T @ W - np.eye(self.dim))))


def _as_array(M) -> np.ndarray:
    if isinstance(M, EmbeddingMatrix):
        return M.values
    return np.asarray(M, dtype=np.float64)


def frobenius_norm(M) -> float:
    """Square root of the sum of squared entries (0 for an empty matrix)."""
    a = _as_array(M)
    if a.size == 0:
        return 0.0
    return float(np.sqrt(np.sum(a * a)))


def unit_normalize_columns(M: EmbeddingMatrix) -> EmbeddingMatrix:
    """Scale every column to Euclidean length one.

    Raises DegenerateVector when a column has norm below 1e-12.
    """
    values = M.values
    norms = np.linalg.norm(values, axis=0)
    bad = np.flatnonzero(norms < NORM_FLOOR)
    if bad.size:
        raise DegenerateVector(f"column {int(bad[0])} has norm {norms[bad[0]]:.3g}")
    return M.with_values(values / norms)


def _svd(a: np.ndarray):
    try:
        u, s, vt = np.linalg.svd(a)
    except np.linalg.LinAlgError as exc:
        raise SvdFailure(str(exc)) from exc
    # Deterministic signs: largest-magnitude entry of each left vector positive.
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[idx, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs, s, vt * signs[:, None]


def solve_procrustes(X: EmbeddingMatrix, Y: EmbeddingMatrix) -> OrthogonalMap:
    """Orthogonal ``W`` minimizing ``||W X - Y||_F``.

    With ``U S V^T = svd(Y X^T)`` the minimizer is ``W = U V^T``.  Reflections
    are allowed; no determinant constraint is imposed.
    """
    x, y = _as_array(X), _as_array(Y)
    if x.shape != y.shape:
        raise DimensionMismatch(f"X has shape {x.shape} but Y has shape {y.shape}")
    u, _, vt = _svd(y @ x.T)
    W = u @ vt
    return OrthogonalMap(W, frobenius_norm(W @ x - y))


def apply_map(W: OrthogonalMap, X: EmbeddingMatrix) -> EmbeddingMatrix:
    if W.dim != X.dim:
        raise DimensionMismatch(f"map has dim {W.dim}, matrix has dim {X.dim}")
    return X.with_values(W.values @ X.values)


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR of a Gaussian, sign-corrected)."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d
