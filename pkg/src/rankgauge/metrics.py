"""Rank measures computed from spectra.

* :func:`rankme` -- exponential of the Shannon entropy of the L1-normalized
  singular values (the smooth "effective" rank).
* :func:`classical_rank` -- count of singular values above a dtype-dependent
  relative threshold.
* :func:`alpha_req_fit` -- power-law decay exponent of an eigenspectrum,
  fitted by least squares in log-log space.
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field
from typing import Any, Literal

import numpy as np

from .errors import DegenerateFit, InsufficientPositiveEigenvalues
from .ingest import DEFAULT_SAMPLES, EmbeddingMatrix, subsample_rows
from .spectrum import EigenSpectrum, SingularSpectrum, covariance_eigenvalues, singular_values

__all__ = [
    "MetricConfig",
    "RankReport",
    "PowerLawFit",
    "rankme",
    "classical_rank",
    "power_law_fit",
    "alpha_req_fit",
    "default_threshold_epsilon",
    "rank_report",
]

FLOAT32_EPS = 1e-7
FLOAT64_EPS = float(np.finfo(np.float64).eps)


def default_threshold_epsilon(dtype) -> float:
    """1e-7 for float32 inputs, float64 machine epsilon otherwise."""
    return FLOAT32_EPS if np.dtype(dtype) == np.float32 else FLOAT64_EPS


@dataclass(frozen=True)
class MetricConfig:
    """Knobs shared by the rank measures.

    entropy_epsilon
        Added to every normalized singular value before taking the entropy.
    renormalize
        Divide the shifted weights by their sum so they form a distribution
        again. With ``False`` the shifted weights are used as is, which
        inflates the result by roughly ``K**2 * eps * (log K - 1)`` on a
        flat K-spectrum (about 2.8 at K = 2048, eps = 1e-7).
    threshold_epsilon
        Relative tolerance of :func:`classical_rank`; ``None`` picks it from
        the source dtype.
    fit_range
        1-based inclusive ``(start, end)`` index window for the power-law
        fit; ``end=None`` runs to the last eigenvalue.
    alpha_source
        ``"covariance"`` fits centered covariance eigenvalues,
        ``"raw"`` fits squared singular values of the uncentered matrix.
    """

    entropy_epsilon: float = 1e-7
    renormalize: bool = True
    threshold_epsilon: float | None = None
    fit_range: tuple[int, int | None] | None = None
    alpha_source: Literal["covariance", "raw"] = "covariance"

    def __post_init__(self):
        if self.entropy_epsilon < 0:
            raise ValueError("entropy_epsilon must be >= 0")
        if self.threshold_epsilon is not None and self.threshold_epsilon <= 0:
            raise ValueError("threshold_epsilon must be > 0")
        if self.fit_range is not None:
            start, end = self.fit_range
            if start < 1 or (end is not None and end < start):
                raise ValueError(f"bad fit_range {self.fit_range}")
        if self.alpha_source not in ("covariance", "raw"):
            raise ValueError(f"unknown alpha_source {self.alpha_source!r}")

    def threshold_for(self, dtype) -> float:
        if self.threshold_epsilon is not None:
            return self.threshold_epsilon
        return default_threshold_epsilon(dtype)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        if d["fit_range"] is not None:
            d["fit_range"] = list(d["fit_range"])
        return d


_DEFAULT = MetricConfig()


def _spectrum(s) -> SingularSpectrum:
    return s if isinstance(s, SingularSpectrum) else SingularSpectrum.from_values(s)


def rankme(s: SingularSpectrum | np.ndarray, cfg: MetricConfig = _DEFAULT) -> float:
    """Smooth rank ``exp(-sum p_k log p_k)`` with ``p_k = sigma_k / ||sigma||_1 + eps``.

    Zero weights contribute nothing (``0 log 0 = 0``); an all-zero spectrum
    with ``eps = 0`` gives 0.
    """
    s = _spectrum(s)
    sigma = s.values
    eps = cfg.entropy_epsilon
    n = sigma.size
    if eps > 0 and eps * n >= 1:
        warnings.warn(
            f"entropy_epsilon={eps} is not small against 1/min(N,K)={1 / n:.3g}",
            RuntimeWarning,
            stacklevel=2,
        )
    total = sigma.sum()
    if total == 0:
        if eps == 0:
            return 0.0
        p = np.full(n, eps)
    else:
        p = sigma / total + eps
    if cfg.renormalize:
        p = p / p.sum()
    p = p[p > 0]
    return float(np.exp(-np.sum(p * np.log(p))))


def classical_rank(s: SingularSpectrum | np.ndarray, cfg: MetricConfig = _DEFAULT) -> int:
    """Number of singular values above ``max(sigma) * max(N, K) * eps``."""
    s = _spectrum(s)
    if s.values.size == 0:
        return 0
    top = s.values[0]
    if top == 0:
        return 0
    tol = top * max(s.n_rows, s.n_cols) * cfg.threshold_for(s.dtype)
    return int(np.count_nonzero(s.values > tol))


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares line ``log lambda_i = log_intercept - alpha * log i``."""

    alpha: float
    log_intercept: float
    r_squared: float
    n_points: int
    start: int
    end: int


def power_law_fit(e: EigenSpectrum | np.ndarray, cfg: MetricConfig = _DEFAULT) -> PowerLawFit:
    """Fit ``lambda_i ~ i**-alpha`` over the configured window.

    Without ``cfg.fit_range`` the window is every index whose eigenvalue
    exceeds ``1e-12 * max(lambda)``. Zero eigenvalues inside an explicit
    window are dropped.
    """
    lam = e.values if isinstance(e, EigenSpectrum) else EigenSpectrum(e, centered=False).values
    idx = np.arange(1, lam.size + 1)
    if cfg.fit_range is None:
        top = lam[0] if lam.size else 0.0
        keep = lam > top * 1e-12
        start, end = 1, lam.size
    else:
        start, end = cfg.fit_range
        end = lam.size if end is None else min(end, lam.size)
        keep = (idx >= start) & (idx <= end) & (lam > 0)
    if np.count_nonzero(keep) < 2:
        raise InsufficientPositiveEigenvalues(
            f"need >= 2 positive eigenvalues in [{start}, {end}], "
            f"found {int(np.count_nonzero(keep))}"
        )
    x = np.log(idx[keep].astype(np.float64))
    y = np.log(lam[keep])
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0:
        raise DegenerateFit("all fit indices are equal")
    if np.ptp(y) == 0:
        return PowerLawFit(0.0, float(y[0]), 1.0, int(x.size), start, end)
    yc = y - y.mean()
    slope = float(xc @ yc) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = yc - slope * xc
    r2 = 1.0 - float(resid @ resid) / float(yc @ yc)
    # values are sorted nonincreasing, so the slope is <= 0 up to round-off
    return PowerLawFit(max(-slope, 0.0), intercept, r2, int(x.size), start, end)


def alpha_req_fit(e: EigenSpectrum | np.ndarray, cfg: MetricConfig = _DEFAULT) -> float:
    """Power-law decay exponent of an eigenspectrum (see :func:`power_law_fit`)."""
    return power_law_fit(e, cfg).alpha


@dataclass(frozen=True)
class RankReport:
    rankme: float
    classical_rank: int
    n_used: int
    n_rows: int
    n_cols: int
    dtype: str
    path: str
    config: MetricConfig = field(default_factory=MetricConfig)
    alpha: float | None = None
    alpha_r_squared: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "rankme": self.rankme,
            "classical_rank": self.classical_rank,
            "alpha": self.alpha,
            "alpha_r_squared": self.alpha_r_squared,
            "n_used": self.n_used,
            "n_rows": self.n_rows,
            "n_cols": self.n_cols,
            "dtype": self.dtype,
            "path": self.path,
            "config": self.config.to_dict(),
        }


def rank_report(
    m: EmbeddingMatrix | np.ndarray,
    cfg: MetricConfig = _DEFAULT,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    path: str = "auto",
    with_alpha: bool = False,
) -> RankReport:
    """Subsample ``m``, take its spectrum and evaluate every rank measure."""
    if not isinstance(m, EmbeddingMatrix):
        m = EmbeddingMatrix(m)
    sub = subsample_rows(m, samples, seed)
    s = singular_values(sub, path)
    alpha = r2 = None
    if with_alpha:
        if cfg.alpha_source == "covariance":
            eig = covariance_eigenvalues(sub, center=True)
        else:
            eig = EigenSpectrum(s.values ** 2, centered=False)
        fit = power_law_fit(eig, cfg)
        alpha, r2 = fit.alpha, fit.r_squared
    return RankReport(
        rankme=rankme(s, cfg),
        classical_rank=classical_rank(s, cfg),
        n_used=sub.n_rows,
        n_rows=m.n_rows,
        n_cols=m.n_cols,
        dtype=str(m.dtype),
        path=s.path,
        config=cfg,
        alpha=alpha,
        alpha_r_squared=r2,
    )

