"""Singular spectra and covariance eigenvalues of embedding matrices.

Two interchangeable routes give the singular values:

* ``direct``: LAPACK SVD of the matrix itself.
* ``gram``: eigenvalues of the smaller Gram matrix (``Z^T Z`` or ``Z Z^T``),
  clamped at zero, then square-rooted. Square roots of tiny eigenvalues are
  dominated by round-off (about ``sqrt(eps) * sigma_max``), so singular
  values below ``1e-4 * sigma_max`` are recomputed from ``Z`` projected onto
  the corresponding Gram eigenvectors, accurate to about ``eps * sigma_max``.

All arithmetic is float64. Gram matrices of tall inputs are accumulated over
fixed row blocks, so float32 inputs are never copied to float64 whole and the
reduction order does not depend on thread count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import ConvergenceFailure, InputError
from .ingest import EmbeddingMatrix

__all__ = [
    "SingularSpectrum",
    "EigenSpectrum",
    "choose_path",
    "gram_matrix",
    "singular_values",
    "covariance_eigenvalues",
]

SpectrumPath = Literal["direct", "gram"]

_BLOCK_ROWS = 8192
# eigenvalues below this fraction of the largest are refined from eigenvectors
_REFINE_BELOW = 1e-8


@dataclass(frozen=True)
class SingularSpectrum:
    """Nonincreasing, nonnegative singular values plus provenance.

    ``dtype`` records the dtype of the matrix the values came from; metrics
    use it to pick the default threshold epsilon.
    """

    values: np.ndarray
    n_rows: int
    n_cols: int
    path: SpectrumPath = "direct"
    dtype: str = "float64"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if v.size != min(self.n_rows, self.n_cols):
            raise InputError(
                f"spectrum has {v.size} values, expected min({self.n_rows}, {self.n_cols})"
            )
        v = np.sort(np.clip(v, 0.0, None))[::-1]
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_values(cls, values, n_rows: int | None = None, n_cols: int | None = None,
                    dtype: str = "float64") -> "SingularSpectrum":
        """Wrap bare values; dims default to a square ``len(values)`` matrix."""
        values = np.asarray(values, dtype=np.float64).ravel()
        n = values.size
        return cls(values, n_rows or n, n_cols or n, "direct", dtype)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class EigenSpectrum:
    values: np.ndarray
    centered: bool

    def __post_init__(self):
        v = np.sort(np.clip(np.asarray(self.values, dtype=np.float64).ravel(), 0.0, None))[::-1]
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size


def _as_matrix(m) -> EmbeddingMatrix:
    return m if isinstance(m, EmbeddingMatrix) else EmbeddingMatrix(m)


def choose_path(n_rows: int, n_cols: int) -> SpectrumPath:
    """Gram when the small side is at most a quarter of N, else direct."""
    return "gram" if 4 * min(n_rows, n_cols) <= n_rows else "direct"


def gram_matrix(m: EmbeddingMatrix | np.ndarray, center: bool = False) -> np.ndarray:
    """Float64 Gram matrix over the smaller side.

    For ``K <= N`` this is ``X^T X`` (K x K), otherwise ``X X^T`` (N x N).
    With ``center=True`` the column means are removed first; only the
    ``K x K`` form is centered, which is what the covariance needs.
    """
    m = _as_matrix(m)
    x = m.data
    n, k = x.shape
    mean = x.mean(axis=0, dtype=np.float64) if center else None
    if k <= n or center:
        g = np.zeros((k, k), dtype=np.float64)
        for start in range(0, n, _BLOCK_ROWS):
            block = x[start:start + _BLOCK_ROWS].astype(np.float64)
            if mean is not None:
                block -= mean
            g += block.T @ block
        return g
    x64 = x.astype(np.float64, copy=False)
    return x64 @ x64.T


def _eigvalsh(g: np.ndarray) -> np.ndarray:
    try:
        w = np.linalg.eigvalsh(g)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"symmetric eigensolver failed: {exc}") from None
    return np.clip(w, 0.0, None)[::-1]


def _projected_singular_values(m: EmbeddingMatrix, vecs: np.ndarray) -> np.ndarray:
    """Singular values of ``Z`` restricted to the span of ``vecs``.

    ``Y = Z @ vecs`` (``Z^T @ vecs`` for wide Z) is formed explicitly and its
    own small Gram matrix diagonalized, so round-off scales with ``||Y||``
    rather than with ``sigma_max``.
    """
    x = m.data
    if m.n_cols > m.n_rows:
        y = x.astype(np.float64, copy=False).T @ vecs
        gy = y.T @ y
    else:
        gy = np.zeros((vecs.shape[1], vecs.shape[1]))
        for start in range(0, x.shape[0], _BLOCK_ROWS):
            y = x[start:start + _BLOCK_ROWS].astype(np.float64) @ vecs
            gy += y.T @ y
    return np.sqrt(_eigvalsh(gy))


def _gram_singular_values(m: EmbeddingMatrix) -> np.ndarray:
    g = gram_matrix(m)
    w = _eigvalsh(g)
    top = w[0]
    small = w < top * _REFINE_BELOW
    if top == 0 or not small.any():
        return np.sqrt(w)
    try:
        w, vecs = np.linalg.eigh(g)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"symmetric eigensolver failed: {exc}") from None
    w = np.clip(w, 0.0, None)
    small = w < w[-1] * _REFINE_BELOW
    s = np.sqrt(w)
    s[small] = _projected_singular_values(m, vecs[:, small])
    return np.sort(s)[::-1]


def singular_values(m: EmbeddingMatrix | np.ndarray, path: str = "auto") -> SingularSpectrum:
    """Singular values of ``m``, sorted nonincreasing, length ``min(N, K)``.

    ``path`` is ``"direct"``, ``"gram"`` or ``"auto"`` (see :func:`choose_path`).
    The matrix is used as is; no mean-centering.
    """
    m = _as_matrix(m)
    n, k = m.shape
    if path == "auto":
        path = choose_path(n, k)
    if path == "direct":
        try:
            s = np.linalg.svd(m.data.astype(np.float64, copy=False), compute_uv=False)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceFailure(f"SVD failed: {exc}") from None
    elif path == "gram":
        s = _gram_singular_values(m)
    else:
        raise ValueError(f"unknown spectrum path {path!r}")
    return SingularSpectrum(s[: min(n, k)], n, k, path, str(m.dtype))


def covariance_eigenvalues(m: EmbeddingMatrix | np.ndarray, center: bool = True) -> EigenSpectrum:
    """Eigenvalues of the K x K feature covariance, sorted nonincreasing.

    Centered: ``(X - mean)^T (X - mean) / (N - 1)``. Uncentered: ``X^T X / N``.
    """
    m = _as_matrix(m)
    n, k = m.shape
    if center and n < 2:
        raise InputError("centered covariance needs at least 2 rows")
    g = gram_matrix(m, center=True) if center else _kxk_gram(m)
    g /= (n - 1) if center else n
    return EigenSpectrum(_eigvalsh(g), centered=center)


def _kxk_gram(m: EmbeddingMatrix) -> np.ndarray:
    if m.n_cols <= m.n_rows:
        return gram_matrix(m)
    x = m.data.astype(np.float64, copy=False)
    return x.T @ x
