"""Exception types shared across the package.

Two base classes split the failure modes the CLI distinguishes: problems with
the input data or its shape (:class:`DataError`, exit code 3) and numerical
failures during computation (:class:`NumericalError`, exit code 4).
"""


class SigwError(Exception):
    """Base class for all package-specific errors."""


class DataError(SigwError):
    """Invalid, malformed, or dimensionally inconsistent input."""


class NumericalError(SigwError):
    """A numerical contract was violated during computation."""


# linear algebra
class NonFinite(DataError):
    """Input contains NaN or infinite entries."""


class NonSymmetric(DataError):
    """Matrix is not symmetric within tolerance."""


class RankDeficient(NumericalError):
    """QR pivot magnitude fell below the rank threshold."""


# measures
class DimensionMismatch(DataError):
    """Array shapes are inconsistent with each other."""


class EmptyMeasure(DataError):
    """A measure with no support points was supplied."""


class NotPSD(NumericalError):
    """Covariance has an eigenvalue below the negative tolerance."""


# slicing
class ZeroDimension(DataError):
    """Requested a direction set with no dimensions or no directions."""


# optimizers
class InfeasibleInit(NumericalError):
    """Initial point violates the optimizer's feasibility precondition."""


class InfeasiblePoint(NumericalError):
    """Point is too far from the Stiefel manifold for this operation."""


# Gaussian closed forms
class DimensionOrder(DataError):
    """The first measure must not have higher dimension than the second."""


# analysis pipeline
class TooFewItems(DataError):
    """Not enough items for the requested operation."""


class LengthMismatch(DataError):
    """Partitions have different lengths."""


class RowMismatch(DataError):
    """Embedding matrices have different row counts."""


class ZeroMatrix(NumericalError):
    """A matrix norm in a denominator is numerically zero."""


class DegenerateAffinity(NumericalError):
    """An affinity degree is numerically zero."""


# CLI ingestion
class ParseError(DataError):
    """A CSV cell failed to parse; carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column


class RaggedRows(DataError):
    """CSV rows have inconsistent field counts; carries the offending line."""

    def __init__(self, message: str, line: int):
        super().__init__(message)
        self.line = line


class EmptyFile(DataError):
    """File contains no data rows."""
