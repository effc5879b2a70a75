"""
Exceptions raised by the multiregeneration engine.

Numerical trouble on a single path is never raised; it is reported through
PathOutcome.status. These classes cover malformed input and broken structure.
"""


class MultiregError(Exception):
    """Base class for every error raised by this package."""
    pass


class DimensionMismatch(MultiregError, ValueError):
    """A point or coefficient vector has the wrong length."""
    pass


class NotMultihomogeneous(MultiregError):
    """A polynomial mixes group degrees across its terms."""

    def __init__(self, first_term, second_term):
        self.terms = (first_term, second_term)
        super().__init__(
            f"terms {first_term} and {second_term} have different group degrees"
        )


class MalformedChart(MultiregError):
    """A chart or hyperplane-at-infinity form is zero or touches another group."""
    pass


class SystemSyntaxError(MultiregError):
    """A .msys file does not follow the grammar."""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class UndeclaredIdentifier(SystemSyntaxError):
    """An expression uses a name that is neither a variable nor a constant."""
    pass


class ArchiveError(MultiregError):
    """A witness archive could not be decoded."""
    pass


class ArchiveVersionError(ArchiveError):
    """The archive version line is not the one this build writes."""
    pass


class StructuralError(MultiregError):
    """Inputs do not fit together (missing witness sets, non-square homotopy, ...)."""
    pass


class PointCountChanged(MultiregError):
    """Endpoints collided while moving a witness set between generic slices."""
    pass


class TrackingError(MultiregError):
    """Raised by operations that cannot continue once some paths failed."""

    def __init__(self, message: str, outcomes=None):
        self.outcomes = list(outcomes or [])
        super().__init__(message)


class EndgameError(MultiregError):
    """The Cauchy endgame could not produce an endpoint."""
    pass


class CycleExceeded(EndgameError):
    pass


class NonConvergent(EndgameError):
    pass


class ChartCrossing(MultiregError, ValueError):
    """A point lies (numerically) on a hyperplane at infinity H_i = 0."""
    pass
