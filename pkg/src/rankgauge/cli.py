"""``rankgauge`` command line.

Every command prints one JSON report on stdout; diagnostics go to stderr.

Exit codes: 0 success, 1 bad input (files, manifests, flags), 2 numerical
failure, 3 a run lacks the rank or alpha the strategy needs.

``RANKGAUGE_THREADS`` caps the BLAS thread pool.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

from threadpoolctl import threadpool_limits

from . import __version__
from .analysis import convergence_curve, correlation_report
from .errors import InputError, MissingValueError, NumericError, ParseError, RankGaugeError
from .ingest import DEFAULT_SAMPLES, load_manifest, load_matrix
from .metrics import MetricConfig, rank_report
from .selection import select_by_alpha, select_by_rank

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2
EXIT_MISSING = 3

COMMANDS = ("compute", "select", "converge", "correlate")


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which is the numeric-failure code here
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def schema_path(command: str) -> Path:
    """Path of the JSON schema that a command's report validates against."""
    return Path(str(resources.files("rankgauge") / "schemas" / f"{command}.schema.json"))


def _metric_config(args) -> MetricConfig:
    return MetricConfig(
        entropy_epsilon=args.epsilon,
        renormalize=not args.no_renormalize,
        threshold_epsilon=getattr(args, "threshold_epsilon", None),
        alpha_source="covariance" if getattr(args, "centered", True) else "raw",
    )


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {v}")
    return v


def _size_list(text: str) -> list[int]:
    return [_positive_int(t.strip()) for t in text.split(",") if t.strip()]


def _add_metric_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--samples", type=_positive_int, default=DEFAULT_SAMPLES,
                   help="rows used for the estimate (default: %(default)s)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=1e-7, help="entropy epsilon")
    p.add_argument("--no-renormalize", action="store_true",
                   help="use the epsilon-shifted weights without renormalizing")
    p.add_argument("--path", choices=("auto", "direct", "gram"), default="auto")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rankgauge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--no-timing", action="store_true",
                        help="emit timing_ms as null so output bytes are reproducible")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compute", parents=[common], help="rank measures of one embedding matrix")
    p.add_argument("input")
    p.add_argument("--format", choices=("npy", "csv", "raw"), default=None,
                   help="input format (default: from suffix; raw needs <input>.json)")
    p.add_argument("--has-header", action="store_true", help="CSV has a header row")
    _add_metric_flags(p)
    p.add_argument("--threshold-epsilon", type=float, default=None)
    p.add_argument("--alpha", action="store_true", help="also fit the power-law exponent")
    p.add_argument("--centered", action=argparse.BooleanOptionalAction, default=True,
                   help="fit alpha on centered covariance eigenvalues (default) "
                        "or on squared raw singular values")

    p = sub.add_parser("select", parents=[common], help="pick a run from a sweep manifest")
    p.add_argument("manifest")
    p.add_argument("--tie-tol", type=float, default=0.0)
    p.add_argument("--strategy", choices=("rankme", "alpha"), default="rankme")
    _add_metric_flags(p)
    p.add_argument("--centered", action=argparse.BooleanOptionalAction, default=True)

    p = sub.add_parser("converge", parents=[common], help="RankMe against subsample size")
    p.add_argument("input")
    p.add_argument("--format", choices=("npy", "csv", "raw"), default=None)
    p.add_argument("--has-header", action="store_true")
    p.add_argument("--sizes", type=_size_list, required=True, help="comma-separated sizes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=1e-7)
    p.add_argument("--no-renormalize", action="store_true")
    p.add_argument("--path", choices=("auto", "direct", "gram"), default="auto")
    p.add_argument("--out", default=None, help="also write the curve as CSV here ('-' for stdout)")

    p = sub.add_parser("correlate", parents=[common], help="Pearson correlation of label,x,y pairs")
    p.add_argument("pairs_csv")
    return parser


# ---------------------------------------------------------------------------


def _cmd_compute(args) -> tuple[list[str], dict[str, Any]]:
    m = load_matrix(args.input, args.format, args.has_header)
    report = rank_report(m, _metric_config(args), args.samples, args.seed, args.path, args.alpha)
    return [args.input], report.to_dict()


def _cmd_select(args) -> tuple[list[str], dict[str, Any]]:
    manifest = load_manifest(args.manifest)
    cfg = _metric_config(args)
    inputs = [args.manifest]
    computed: dict[str, float] = {}
    for run in manifest.runs:
        needed = run.rank if args.strategy == "rankme" else run.alpha
        path = run.resolved_path(manifest.base_dir)
        if needed is not None or path is None:
            continue
        inputs.append(str(path))
        rep = rank_report(load_matrix(path), cfg, args.samples, args.seed, args.path,
                          with_alpha=args.strategy == "alpha")
        computed[run.run_id] = rep.rankme if args.strategy == "rankme" else rep.alpha
    if args.strategy == "rankme":
        result = select_by_rank(manifest, args.tie_tol, computed)
    else:
        result = select_by_alpha(manifest, computed)
    return inputs, result.to_dict()


def _cmd_converge(args) -> tuple[list[str], dict[str, Any]]:
    m = load_matrix(args.input, args.format, args.has_header)
    cfg = MetricConfig(entropy_epsilon=args.epsilon, renormalize=not args.no_renormalize)
    curve = convergence_curve(m, args.sizes, args.seed, cfg, args.path)
    if args.out == "-":
        sys.stdout.write(curve.to_csv())
    elif args.out:
        Path(args.out).write_text(curve.to_csv())
    return [args.input], curve.to_dict()


def _read_pairs(path: str) -> list[tuple[str, float, float]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["label", "x", "y"]:
            raise ParseError(1, 1, ",".join(header or []))
        pairs = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(lineno, len(row), ",".join(row))
            vals = []
            for col in (1, 2):
                try:
                    vals.append(float(row[col]))
                except ValueError:
                    raise ParseError(lineno, col + 1, row[col]) from None
            pairs.append((row[0], vals[0], vals[1]))
    return pairs


def _cmd_correlate(args) -> tuple[list[str], dict[str, Any]]:
    return [args.pairs_csv], correlation_report(_read_pairs(args.pairs_csv)).to_dict()


_HANDLERS = {
    "compute": _cmd_compute,
    "select": _cmd_select,
    "converge": _cmd_converge,
    "correlate": _cmd_correlate,
}


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        t0 = time.perf_counter()
        inputs, outputs = _HANDLERS[args.command](args)
        elapsed = (time.perf_counter() - t0) * 1e3
    except (InputError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MissingValueError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except RankGaugeError as exc:  # pragma: no cover - every subclass is handled above
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    report = {
        "command": args.command,
        "inputs": inputs,
        "outputs": outputs,
        "timing_ms": None if args.no_timing else round(elapsed, 3),
        "tool_version": __version__,
    }
    if not (args.command == "converge" and args.out == "-"):
        sys.stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    threads = os.environ.get("RANKGAUGE_THREADS")
    if threads:
        with threadpool_limits(limits=int(threads)):
            return run(argv)
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
