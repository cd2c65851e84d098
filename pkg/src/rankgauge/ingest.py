"""Loading embedding matrices and run manifests, and row subsampling.

Supported on-disk formats:

* NPY version 1.0, 2-D, C order, little-endian ``<f4`` or ``<f8``.
* CSV, comma separated, optional single header row, parsed as float64.
* Raw little-endian floats with a JSON sidecar ``{"shape": [N, K], "dtype": "f32"|"f64"}``.

Run manifests are JSON documents describing a one-axis hyperparameter sweep.
"""

from __future__ import annotations

import ast
import csv
import json
import math
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import (
    DuplicateRunId,
    EmptyManifest,
    InputError,
    MagicMismatch,
    NonFiniteData,
    ParseError,
    RaggedRows,
    SchemaError,
    ShapeError,
    UnorderedValues,
    UnsupportedDtype,
    UnsupportedOrder,
    UnsupportedVersion,
)

__all__ = [
    "DEFAULT_SAMPLES",
    "EmbeddingMatrix",
    "RunRecord",
    "RunManifest",
    "load_npy",
    "write_npy",
    "load_csv",
    "load_raw",
    "write_raw",
    "load_matrix",
    "load_manifest",
    "parse_manifest",
    "subsample_indices",
    "subsample_rows",
]

DEFAULT_SAMPLES = 25_600

NPY_MAGIC = b"\x93NUMPY"
_NPY_DESCR = {"<f4": np.dtype("<f4"), "<f8": np.dtype("<f8")}
_RAW_DTYPES = {"f32": np.dtype("<f4"), "f64": np.dtype("<f8")}

PathLike = str | os.PathLike


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Dense N x K matrix of model outputs, one sample per row.

    ``data`` is coerced to float64 unless it is already float32 or float64.
    Construction fails on non-2-D input, empty axes and non-finite entries.
    """

    data: np.ndarray
    source_label: str = ""

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float64)
        if arr.ndim != 2:
            raise ShapeError(f"embedding matrix must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeError(f"embedding matrix needs N >= 1 and K >= 1, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise NonFiniteData("embedding matrix contains NaN or Inf entries")
        object.__setattr__(self, "data", arr)

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    @property
    def n_cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype


# ---------------------------------------------------------------------------
# NPY v1.0


def _npy_header(descr: str, shape: tuple[int, int]) -> bytes:
    text = "{'descr': '%s', 'fortran_order': False, 'shape': (%d, %d), }" % (descr, *shape)
    # magic(6) + version(2) + length(2) + header + '\n' is padded to a multiple of 64
    pad = -(10 + len(text) + 1) % 64
    header = (text + " " * pad + "\n").encode("latin1")
    if len(header) > 0xFFFF:
        raise ShapeError("NPY v1.0 header too long")
    return NPY_MAGIC + b"\x01\x00" + struct.pack("<H", len(header)) + header


def write_npy(path: PathLike, matrix: EmbeddingMatrix | np.ndarray) -> None:
    """Write a 2-D float32/float64 matrix as an NPY v1.0 file."""
    if not isinstance(matrix, EmbeddingMatrix):
        matrix = EmbeddingMatrix(matrix)
    descr = "<f4" if matrix.dtype == np.float32 else "<f8"
    payload = np.ascontiguousarray(matrix.data, dtype=_NPY_DESCR[descr]).tobytes()
    with open(path, "wb") as fh:
        fh.write(_npy_header(descr, matrix.shape))
        fh.write(payload)


def _parse_npy_header(raw: bytes) -> tuple[np.dtype, tuple[int, int], int]:
    if raw[:6] != NPY_MAGIC:
        raise MagicMismatch("not an NPY file (bad magic bytes)")
    if len(raw) < 10:
        raise MagicMismatch("truncated NPY preamble")
    major, minor = raw[6], raw[7]
    if (major, minor) != (1, 0):
        raise UnsupportedVersion(f"only NPY version 1.0 is supported, got {major}.{minor}")
    (hlen,) = struct.unpack("<H", raw[8:10])
    end = 10 + hlen
    if len(raw) < end:
        raise SchemaError("truncated NPY header")
    try:
        header = ast.literal_eval(raw[10:end].decode("latin1"))
    except (ValueError, SyntaxError) as exc:
        raise SchemaError(f"malformed NPY header: {exc}") from None
    if not isinstance(header, dict) or set(header) != {"descr", "fortran_order", "shape"}:
        raise SchemaError(f"NPY header must have keys descr, fortran_order, shape: {header!r}")

    descr = header["descr"]
    if descr not in _NPY_DESCR:
        raise UnsupportedDtype(f"dtype descriptor {descr!r} is not '<f4' or '<f8'")
    if header["fortran_order"] is not False:
        raise UnsupportedOrder("fortran_order arrays are not supported")
    shape = header["shape"]
    if not isinstance(shape, tuple) or len(shape) != 2 or not all(
        isinstance(d, int) and d >= 0 for d in shape
    ):
        raise ShapeError(f"expected a 2-D shape, got {shape!r}")
    return _NPY_DESCR[descr], shape, end


def load_npy(path: PathLike, source_label: str = "") -> EmbeddingMatrix:
    """Read a 2-D little-endian float NPY v1.0 file."""
    raw = Path(path).read_bytes()
    dtype, shape, offset = _parse_npy_header(raw)
    expected = shape[0] * shape[1] * dtype.itemsize
    if len(raw) - offset != expected:
        raise ShapeError(
            f"payload has {len(raw) - offset} bytes, shape {shape} needs {expected}"
        )
    data = np.frombuffer(raw, dtype=dtype, offset=offset).reshape(shape)
    return EmbeddingMatrix(data.astype(dtype.newbyteorder("="), copy=True), source_label)


# ---------------------------------------------------------------------------
# CSV


def load_csv(path: PathLike, has_header: bool = False, source_label: str = "") -> EmbeddingMatrix:
    """Read a rectangular numeric CSV into a float64 matrix.

    Row and column numbers in ``ParseError`` are 1-based file positions.
    Blank lines are ignored.
    """
    rows: list[list[float]] = []
    width = None
    with open(path, newline="") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if has_header and lineno == 1:
                continue
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise RaggedRows(f"row {lineno} has {len(record)} fields, expected {width}")
            values = []
            for col, cell in enumerate(record, start=1):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ParseError(lineno, col, cell) from None
            rows.append(values)
    if not rows:
        raise ShapeError(f"{path}: no data rows")
    return EmbeddingMatrix(np.array(rows, dtype=np.float64), source_label)


# ---------------------------------------------------------------------------
# raw binary + sidecar


def _sidecar_path(path: PathLike) -> Path:
    return Path(str(path) + ".json")


def write_raw(path: PathLike, matrix: EmbeddingMatrix | np.ndarray) -> None:
    """Write raw little-endian floats plus a ``<path>.json`` sidecar."""
    if not isinstance(matrix, EmbeddingMatrix):
        matrix = EmbeddingMatrix(matrix)
    tag = "f32" if matrix.dtype == np.float32 else "f64"
    Path(path).write_bytes(np.ascontiguousarray(matrix.data, dtype=_RAW_DTYPES[tag]).tobytes())
    _sidecar_path(path).write_text(json.dumps({"shape": list(matrix.shape), "dtype": tag}))


def load_raw(path: PathLike, sidecar: PathLike | None = None, source_label: str = "") -> EmbeddingMatrix:
    """Read raw little-endian floats described by a JSON sidecar.

    The sidecar defaults to ``<path>.json``.
    """
    sidecar = Path(sidecar) if sidecar is not None else _sidecar_path(path)
    try:
        meta = json.loads(sidecar.read_text())
    except FileNotFoundError:
        raise SchemaError(f"missing sidecar {sidecar}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"sidecar {sidecar} is not valid JSON: {exc}") from None
    if not isinstance(meta, dict) or "shape" not in meta:
        raise SchemaError("sidecar must be an object with 'shape' and 'dtype'")
    tag = meta.get("dtype", "f32")
    if tag not in _RAW_DTYPES:
        raise UnsupportedDtype(f"sidecar dtype {tag!r} is not 'f32' or 'f64'")
    shape = meta["shape"]
    if not isinstance(shape, list) or len(shape) != 2 or not all(
        isinstance(d, int) and not isinstance(d, bool) and d >= 0 for d in shape
    ):
        raise ShapeError(f"sidecar shape must be [N, K], got {shape!r}")
    dtype = _RAW_DTYPES[tag]
    raw = Path(path).read_bytes()
    if len(raw) != shape[0] * shape[1] * dtype.itemsize:
        raise ShapeError(f"payload has {len(raw)} bytes, shape {shape} needs "
                         f"{shape[0] * shape[1] * dtype.itemsize}")
    data = np.frombuffer(raw, dtype=dtype).reshape(shape)
    return EmbeddingMatrix(data.astype(dtype.newbyteorder("="), copy=True), source_label)


def load_matrix(path: PathLike, fmt: str | None = None, has_header: bool = False) -> EmbeddingMatrix:
    """Dispatch on ``fmt`` (``npy``, ``csv``, ``raw``) or on the file suffix."""
    if fmt is None:
        suffix = Path(path).suffix.lower()
        fmt = {".npy": "npy", ".csv": "csv"}.get(suffix, "raw")
    if fmt == "npy":
        return load_npy(path)
    if fmt == "csv":
        return load_csv(path, has_header=has_header)
    if fmt == "raw":
        return load_raw(path)
    raise ValueError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# manifests


@dataclass(frozen=True)
class RunRecord:
    run_id: str
    hp_value: float | str
    rank: float | None = None
    embeddings_path: str | None = None
    clip_cap: float | None = None
    alpha: float | None = None

    def resolved_path(self, base_dir: PathLike | None) -> Path | None:
        if self.embeddings_path is None:
            return None
        p = Path(self.embeddings_path)
        if base_dir is not None and not p.is_absolute():
            p = Path(base_dir) / p
        return p

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"run_id": self.run_id, "hp_value": self.hp_value}
        for key in ("rank", "embeddings_path", "clip_cap", "alpha"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out


@dataclass(frozen=True)
class RunManifest:
    """An ordered one-axis sweep of training runs.

    ``base_dir`` anchors relative ``embeddings_path`` entries; it is the
    manifest's directory when loaded from disk.
    """

    axis_name: str
    ordered: bool
    runs: tuple[RunRecord, ...]
    base_dir: Path | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "runs", tuple(self.runs))
        _validate_runs(self.runs, self.ordered)

    def __len__(self) -> int:
        return len(self.runs)

    @property
    def run_ids(self) -> list[str]:
        return [r.run_id for r in self.runs]

    def to_dict(self) -> dict[str, Any]:
        return {
            "axis_name": self.axis_name,
            "ordered": self.ordered,
            "runs": [r.to_dict() for r in self.runs],
        }


def _validate_runs(runs: Sequence[RunRecord], ordered: bool) -> None:
    if not runs:
        raise EmptyManifest("manifest has no runs")
    seen: set[str] = set()
    for run in runs:
        if run.run_id in seen:
            raise DuplicateRunId(f"duplicate run_id {run.run_id!r}")
        seen.add(run.run_id)
    if ordered:
        values = [r.hp_value for r in runs]
        if not all(isinstance(v, (int, float)) for v in values):
            raise UnorderedValues("ordered manifest needs numeric hp_value for every run")
        diffs = [b - a for a, b in zip(values, values[1:])]
        if not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
            raise UnorderedValues(
                f"hp_value is not strictly monotone in manifest order: {values}"
            )


def _is_number(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


_RUN_KEYS = {"run_id", "hp_value", "rank", "embeddings_path", "clip_cap", "alpha"}


def _parse_run(i: int, obj: Any) -> RunRecord:
    where = f"runs[{i}]"
    if not isinstance(obj, dict):
        raise SchemaError(f"{where} must be an object")
    unknown = set(obj) - _RUN_KEYS
    if unknown:
        raise SchemaError(f"{where} has unknown keys {sorted(unknown)}")
    run_id = obj.get("run_id")
    if not isinstance(run_id, str) or not run_id:
        raise SchemaError(f"{where}.run_id must be a non-empty string")
    hp = obj.get("hp_value")
    if not (_is_number(hp) or isinstance(hp, str)):
        raise SchemaError(f"{where}.hp_value must be a number or string")

    def opt_number(key, positive=False):
        v = obj.get(key)
        if v is None:
            return None
        if not _is_number(v) or v < 0 or (positive and v == 0):
            kind = "positive" if positive else "nonnegative"
            raise SchemaError(f"{where}.{key} must be a {kind} number, got {v!r}")
        return float(v)

    rank = opt_number("rank")
    clip_cap = opt_number("clip_cap", positive=True)
    alpha = obj.get("alpha")
    if alpha is not None:
        if not _is_number(alpha):
            raise SchemaError(f"{where}.alpha must be a number")
        alpha = float(alpha)
    path = obj.get("embeddings_path")
    if path is not None and not isinstance(path, str):
        raise SchemaError(f"{where}.embeddings_path must be a string")
    if rank is None and path is None and alpha is None:
        raise SchemaError(f"{where} needs at least one of rank, embeddings_path")
    return RunRecord(run_id, hp, rank, path, clip_cap, alpha)


def parse_manifest(doc: Any, base_dir: PathLike | None = None) -> RunManifest:
    """Validate a decoded manifest document."""
    if not isinstance(doc, dict):
        raise SchemaError("manifest must be a JSON object")
    axis = doc.get("axis_name")
    if not isinstance(axis, str):
        raise SchemaError("axis_name must be a string")
    ordered = doc.get("ordered")
    if not isinstance(ordered, bool):
        raise SchemaError("ordered must be a boolean")
    runs = doc.get("runs")
    if not isinstance(runs, list):
        raise SchemaError("runs must be a list")
    records = tuple(_parse_run(i, r) for i, r in enumerate(runs))
    return RunManifest(axis, ordered, records, Path(base_dir) if base_dir is not None else None)


def load_manifest(path: PathLike) -> RunManifest:
    """Load and validate a JSON run manifest."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from None
    return parse_manifest(doc, base_dir=Path(path).resolve().parent)


# ---------------------------------------------------------------------------
# subsampling


def subsample_indices(n_rows: int, n: int, seed: int = 0) -> np.ndarray:
    """Sorted row indices of a uniform draw of ``min(n, n_rows)`` rows without replacement."""
    if n < 1:
        raise InputError(f"sample count must be >= 1, got {n}")
    if n >= n_rows:
        return np.arange(n_rows)
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n_rows, size=n, replace=False))


def subsample_rows(m: EmbeddingMatrix, n: int = DEFAULT_SAMPLES, seed: int = 0) -> EmbeddingMatrix:
    """Keep ``n`` uniformly drawn rows of ``m``; returns ``m`` itself when ``n >= N``.

    Selected rows keep their original relative order.
    """
    if n < 1:
        raise InputError(f"sample count must be >= 1, got {n}")
    if n >= m.n_rows:
        return m
    idx = subsample_indices(m.n_rows, n, seed)
    return EmbeddingMatrix(m.data[idx], m.source_label)
