"""Exception hierarchy.

The three top-level classes map onto CLI exit codes: ``InputError`` -> 1,
``NumericError`` -> 2, ``MissingValueError`` -> 3.
"""


class RankGaugeError(Exception):
    """Base class for every error raised by this package."""


class InputError(RankGaugeError, ValueError):
    """Bad input data, file or document."""


class NumericError(RankGaugeError, ArithmeticError):
    """A numerical routine could not produce a result."""


class MissingValueError(RankGaugeError, LookupError):
    """A run lacks the value needed by a selection strategy."""


# ingest
class MagicMismatch(InputError):
    pass


class UnsupportedVersion(InputError):
    pass


class UnsupportedDtype(InputError):
    pass


class UnsupportedOrder(InputError):
    pass


class ShapeError(InputError):
    pass


class NonFiniteData(InputError):
    pass


class RaggedRows(InputError):
    pass


class ParseError(InputError):
    def __init__(self, row: int, col: int, text: str):
        self.row = row
        self.col = col
        self.text = text
        super().__init__(f"cannot parse {text!r} at row {row}, column {col}")


class SchemaError(InputError):
    pass


class DuplicateRunId(InputError):
    pass


class UnorderedValues(InputError):
    pass


class EmptyManifest(InputError):
    pass


# analysis
class ZeroVariance(InputError):
    pass


class LengthMismatch(InputError):
    pass


class LabelMismatch(InputError):
    pass


# numerics
class ConvergenceFailure(NumericError):
    def __init__(self, message: str, iterations: int | None = None):
        self.iterations = iterations
        if iterations is not None:
            message = f"{message} (after {iterations} iterations)"
        super().__init__(message)


class InsufficientPositiveEigenvalues(NumericError):
    pass


class DegenerateFit(NumericError):
    pass


# selection
class MissingRank(MissingValueError):
    pass


class MissingAlpha(MissingValueError):
    pass
