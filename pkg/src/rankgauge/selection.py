"""Label-free hyperparameter selection over a sweep of runs.

:func:`select_by_rank` walks the runs in manifest order (increasing
hyperparameter value) and keeps the highest-rank run. On an exact tie with
the incumbent, run ``i`` takes over only when it is above one of its
neighbours, ``r[i] > r[i-1]`` or ``r[i] > r[i+1]``; a missing neighbour
compares false. Ranks are clipped per run at ``clip_cap`` first, so a
plateau of runs saturating the representation dimension is resolved by the
neighbour rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

from .errors import MissingAlpha, MissingRank
from .ingest import RunManifest, RunRecord

__all__ = [
    "TraceEntry",
    "SelectionResult",
    "clip_rank",
    "effective_ranks",
    "select_by_rank",
    "select_by_alpha",
    "distance_to_one",
    "manifest_from_ranks",
]

KEPT_INITIAL = "kept_initial"
REPLACED_BY_GREATER = "replaced_by_greater"
REPLACED_BY_TIEBREAK = "replaced_by_tiebreak"
REPLACED_BY_CLOSER = "replaced_by_closer"
SKIPPED = "skipped"


@dataclass(frozen=True)
class TraceEntry:
    run_id: str
    rank: float
    decision: str


@dataclass(frozen=True)
class SelectionResult:
    """Chosen run and the per-run decision trace.

    For the alpha strategy ``chosen_rank`` and the trace ``rank`` fields hold
    the alpha values. ``tied_run_ids`` is filled only when an unordered sweep
    has several maximal runs; the neighbour tie-break is meaningless there,
    so every maximal run is reported and ``chosen_run_id`` is the first.
    """

    chosen_run_id: str
    chosen_rank: float
    trace: tuple[TraceEntry, ...]
    strategy: str = "rankme"
    tied_run_ids: tuple[str, ...] = field(default_factory=tuple)

    @property
    def chosen_index(self) -> int:
        return [t.run_id for t in self.trace].index(self.chosen_run_id)

    @property
    def decisions(self) -> list[str]:
        return [t.decision for t in self.trace]

    @property
    def ambiguous(self) -> bool:
        return len(self.tied_run_ids) > 1

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "chosen_run_id": self.chosen_run_id,
            "chosen_rank": self.chosen_rank,
            "strategy": self.strategy,
            "trace": [
                {"run_id": t.run_id, "rank": t.rank, "decision": t.decision} for t in self.trace
            ],
        }
        if self.tied_run_ids:
            out["tied_run_ids"] = list(self.tied_run_ids)
        return out


def clip_rank(rank: float, cap: float) -> float:
    """``min(rank, cap)``; the cap is the representation dimension."""
    if not cap > 0:
        raise ValueError(f"clip cap must be positive, got {cap}")
    return min(rank, cap)


def effective_ranks(m: RunManifest, ranks: Mapping[str, float] | None = None) -> list[float]:
    """Per-run rank after clipping, in manifest order.

    ``ranks`` overrides or fills in the manifest's precomputed values.
    """
    out = []
    for run in m.runs:
        r = run.rank
        if ranks is not None and run.run_id in ranks:
            r = ranks[run.run_id]
        if r is None:
            raise MissingRank(f"run {run.run_id!r} has no rank")
        if run.clip_cap is not None:
            r = clip_rank(r, run.clip_cap)
        out.append(float(r))
    return out


def _ties(a: float, b: float, tol: float) -> bool:
    if tol == 0:
        return a == b
    return abs(a - b) <= tol * max(abs(a), abs(b))


def select_by_rank(
    m: RunManifest,
    tie_tolerance: float = 0.0,
    ranks: Mapping[str, float] | None = None,
) -> SelectionResult:
    """Pick the highest-rank run of a sweep.

    ``tie_tolerance`` is relative; with the default 0 only exactly equal
    ranks tie and the chosen rank is always the sweep maximum. With a
    positive tolerance the chosen rank is within that tolerance of it.
    """
    if tie_tolerance < 0:
        raise ValueError("tie_tolerance must be >= 0")
    r = effective_ranks(m, ranks)
    ids = m.run_ids
    n = len(r)

    best = 0
    trace = [TraceEntry(ids[0], r[0], KEPT_INITIAL)]
    for i in range(1, n):
        if _ties(r[i], r[best], tie_tolerance):
            above_left = r[i] > r[i - 1]
            above_right = i + 1 < n and r[i] > r[i + 1]
            if m.ordered and (above_left or above_right):
                best = i
                decision = REPLACED_BY_TIEBREAK
            else:
                decision = SKIPPED
        elif r[i] > r[best]:
            best = i
            decision = REPLACED_BY_GREATER
        else:
            decision = SKIPPED
        trace.append(TraceEntry(ids[i], r[i], decision))

    tied: tuple[str, ...] = ()
    if not m.ordered:
        tied = tuple(ids[i] for i in range(n) if _ties(r[i], r[best], tie_tolerance))
        if len(tied) < 2:
            tied = ()
    return SelectionResult(ids[best], r[best], tuple(trace), "rankme", tied)


def distance_to_one(alpha: float) -> float:
    return abs(alpha - 1.0)


def select_by_alpha(
    m: RunManifest,
    alphas: Mapping[str, float] | None = None,
    score: Callable[[float], float] = distance_to_one,
) -> SelectionResult:
    """Pick the run whose alpha minimizes ``score`` (default ``|alpha - 1|``).

    Ties go to the earliest run. ``alphas`` defaults to the manifest's
    ``alpha`` fields.
    """
    values: list[float] = []
    for run in m.runs:
        a = alphas.get(run.run_id) if alphas is not None else None
        if a is None:
            a = run.alpha
        if a is None:
            raise MissingAlpha(f"run {run.run_id!r} has no alpha")
        values.append(float(a))

    ids = m.run_ids
    best = 0
    trace = [TraceEntry(ids[0], values[0], KEPT_INITIAL)]
    for i in range(1, len(values)):
        if score(values[i]) < score(values[best]):
            best = i
            trace.append(TraceEntry(ids[i], values[i], REPLACED_BY_CLOSER))
        else:
            trace.append(TraceEntry(ids[i], values[i], SKIPPED))
    return SelectionResult(ids[best], values[best], tuple(trace), "alpha")


def manifest_from_ranks(
    ranks: Sequence[float],
    hp_values: Sequence[float] | None = None,
    axis_name: str = "hp",
    clip_cap: float | None = None,
    run_ids: Sequence[str] | None = None,
) -> RunManifest:
    """Build an ordered manifest from bare rank values."""
    n = len(ranks)
    hp_values = list(hp_values) if hp_values is not None else list(range(n))
    run_ids = list(run_ids) if run_ids is not None else [f"run{i}" for i in range(n)]
    runs = [
        RunRecord(run_ids[i], hp_values[i], float(ranks[i]), clip_cap=clip_cap)
        for i in range(n)
    ]
    return RunManifest(axis_name, True, tuple(runs))
