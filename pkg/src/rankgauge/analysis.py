"""Validation studies around the rank measures.

Subsample convergence of RankMe, Pearson correlation between rank values
(source vs. target dataset, or RankMe vs. classical rank), the Eckart-Young
tail-energy identity, and a planted-rank matrix generator used to build
synthetic families for these checks.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import InputError, LabelMismatch, LengthMismatch, ZeroVariance
from .ingest import EmbeddingMatrix, subsample_rows
from .metrics import MetricConfig, classical_rank, rankme
from .spectrum import SingularSpectrum, singular_values

__all__ = [
    "ConvergenceCurve",
    "CorrelationReport",
    "convergence_curve",
    "size_seed",
    "pearson",
    "correlation_report",
    "rank_transfer_report",
    "estimator_comparison",
    "tail_energy",
    "eckart_young_check",
    "planted_rank_matrix",
]

_DEFAULT = MetricConfig()


@dataclass(frozen=True)
class ConvergenceCurve:
    sample_sizes: tuple[int, ...]
    rankme_values: tuple[float, ...]
    full_value: float
    n_rows: int
    seed: int = 0

    def fractions(self) -> list[float]:
        """Each point as a fraction of the full-matrix value."""
        return [v / self.full_value if self.full_value else math.nan for v in self.rankme_values]

    def to_dict(self) -> dict[str, Any]:
        return {
            "sample_sizes": list(self.sample_sizes),
            "rankme_values": list(self.rankme_values),
            "full_value": self.full_value,
            "n_rows": self.n_rows,
            "seed": self.seed,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["size", "rankme"])
        for n, v in zip(self.sample_sizes, self.rankme_values):
            w.writerow([n, repr(v)])
        return buf.getvalue()


@dataclass(frozen=True)
class CorrelationReport:
    pearson_r: float
    n_pairs: int
    pairs: tuple[tuple[str, float, float], ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "pearson_r": self.pearson_r,
            "n_pairs": self.n_pairs,
            "pairs": [{"label": lab, "x": x, "y": y} for lab, x, y in self.pairs],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["label", "x", "y"])
        for lab, x, y in self.pairs:
            w.writerow([lab, repr(x), repr(y)])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# convergence


def size_seed(seed: int, size: int) -> int:
    """Seed for the subsample of a given size, derived from the curve seed."""
    return int(np.random.SeedSequence([seed, size]).generate_state(1)[0])


def convergence_curve(
    m: EmbeddingMatrix | np.ndarray,
    sizes: Sequence[int],
    seed: int = 0,
    cfg: MetricConfig = _DEFAULT,
    path: str = "auto",
) -> ConvergenceCurve:
    """RankMe of independent row subsamples of increasing size.

    Every size draws its own subsample with :func:`size_seed`, so points are
    not nested prefixes of one shuffle. A size equal to N uses the full
    matrix and reproduces ``full_value`` exactly.
    """
    if not isinstance(m, EmbeddingMatrix):
        m = EmbeddingMatrix(m)
    sizes = [int(n) for n in sizes]
    if not sizes:
        raise InputError("need at least one sample size")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise InputError(f"sample sizes must be strictly increasing, got {sizes}")
    if sizes[0] < 1 or sizes[-1] > m.n_rows:
        raise InputError(f"sample sizes must lie in [1, {m.n_rows}], got {sizes}")

    values = []
    for n in sizes:
        sub = subsample_rows(m, n, size_seed(seed, n))
        values.append(rankme(singular_values(sub, path), cfg))
    full = values[-1] if sizes[-1] == m.n_rows else rankme(singular_values(m, path), cfg)
    return ConvergenceCurve(tuple(sizes), tuple(values), full, m.n_rows, seed)


# ---------------------------------------------------------------------------
# correlation


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    x = np.asarray(xs, dtype=np.float64).ravel()
    y = np.asarray(ys, dtype=np.float64).ravel()
    if x.size != y.size:
        raise LengthMismatch(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise LengthMismatch("need at least 2 pairs")
    n = x.size
    xc = x - x.mean()
    yc = y - y.mean()
    var_x = float(xc @ xc) / (n - 1)
    var_y = float(yc @ yc) / (n - 1)
    if var_x == 0 or var_y == 0:
        raise ZeroVariance("a variable has zero variance")
    cov = float(xc @ yc) / (n - 1)
    r = cov / math.sqrt(var_x * var_y)
    return max(-1.0, min(1.0, r))


def correlation_report(pairs: Iterable[tuple[str, float, float]]) -> CorrelationReport:
    pairs = tuple((str(lab), float(x), float(y)) for lab, x, y in pairs)
    r = pearson([p[1] for p in pairs], [p[2] for p in pairs])
    return CorrelationReport(r, len(pairs), pairs)


def _by_label(items: Sequence[tuple[str, float]], name: str) -> dict[str, float]:
    out: dict[str, float] = {}
    for label, value in items:
        if label in out:
            raise LabelMismatch(f"duplicate label {label!r} in {name}")
        out[label] = float(value)
    return out


def rank_transfer_report(
    source: Sequence[tuple[str, float]],
    target: Sequence[tuple[str, float]],
) -> CorrelationReport:
    """Correlate source-dataset ranks with target-dataset ranks, matched by label."""
    src = _by_label(source, "source")
    tgt = _by_label(target, "target")
    if set(src) != set(tgt):
        missing = sorted(set(src) ^ set(tgt))
        raise LabelMismatch(f"labels do not align one-to-one: {missing}")
    return correlation_report((lab, src[lab], tgt[lab]) for lab, _ in source)


def estimator_comparison(
    matrices: Iterable[tuple[str, EmbeddingMatrix | np.ndarray]],
    cfg: MetricConfig = _DEFAULT,
    path: str = "auto",
) -> CorrelationReport:
    """Pairs of (RankMe, classical rank) over a family of matrices, with their correlation."""
    pairs = []
    for label, m in matrices:
        s = singular_values(m, path)
        pairs.append((label, rankme(s, cfg), float(classical_rank(s, cfg))))
    return correlation_report(pairs)


# ---------------------------------------------------------------------------
# Eckart-Young


def tail_energy(s: SingularSpectrum | np.ndarray, R: int) -> float:
    """Sum of squared singular values beyond the first ``R``."""
    v = s.values if isinstance(s, SingularSpectrum) else np.sort(np.asarray(s, float))[::-1]
    if not 0 <= R <= v.size:
        raise InputError(f"R must lie in [0, {v.size}], got {R}")
    tail = v[R:]
    return float(tail @ tail)


def eckart_young_check(y: EmbeddingMatrix | np.ndarray, R: int) -> tuple[float, float]:
    """``(bound, achieved)`` for the best rank-``R`` approximation of ``y``.

    ``bound`` is the tail energy of the spectrum; ``achieved`` is the squared
    Frobenius error of the truncated-SVD reconstruction. The two agree up to
    round-off.
    """
    a = y.data if isinstance(y, EmbeddingMatrix) else np.asarray(y)
    a = a.astype(np.float64, copy=False)
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    bound = tail_energy(s, R)
    approx = (u[:, :R] * s[:R]) @ vt[:R]
    diff = a - approx
    return bound, float(np.sum(diff * diff))


# ---------------------------------------------------------------------------
# synthetic matrices


def planted_rank_matrix(
    n_rows: int,
    n_cols: int,
    rank: int,
    noise: float = 0.0,
    seed: int | np.random.Generator | None = 0,
    dtype=np.float64,
    block_rows: int = 8192,
) -> np.ndarray:
    """``A @ B / sqrt(rank) + noise * E`` with i.i.d. standard normal A, B, E.

    A is ``n_rows x rank`` and B is ``rank x n_cols``. Rows are generated in
    blocks so float32 outputs never need a full float64 copy.
    """
    if not 1 <= rank <= min(n_rows, n_cols):
        raise InputError(f"rank must lie in [1, {min(n_rows, n_cols)}], got {rank}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    b = rng.standard_normal((rank, n_cols)) / math.sqrt(rank)
    out = np.empty((n_rows, n_cols), dtype=dtype)
    for start in range(0, n_rows, block_rows):
        stop = min(start + block_rows, n_rows)
        block = rng.standard_normal((stop - start, rank)) @ b
        if noise:
            block += noise * rng.standard_normal(block.shape)
        out[start:stop] = block
    return out
