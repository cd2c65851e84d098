"""Effective rank of embedding matrices and label-free model selection."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .ingest import (
    DEFAULT_SAMPLES,
    EmbeddingMatrix,
    RunManifest,
    RunRecord,
    load_csv,
    load_manifest,
    load_matrix,
    load_npy,
    load_raw,
    parse_manifest,
    subsample_rows,
    write_npy,
    write_raw,
)
from .spectrum import EigenSpectrum, SingularSpectrum, covariance_eigenvalues, singular_values
from .metrics import (
    MetricConfig,
    PowerLawFit,
    RankReport,
    alpha_req_fit,
    classical_rank,
    power_law_fit,
    rank_report,
    rankme,
)
from .selection import (
    SelectionResult,
    clip_rank,
    manifest_from_ranks,
    select_by_alpha,
    select_by_rank,
)
from .analysis import (
    ConvergenceCurve,
    CorrelationReport,
    convergence_curve,
    eckart_young_check,
    estimator_comparison,
    pearson,
    planted_rank_matrix,
    rank_transfer_report,
    tail_energy,
)
