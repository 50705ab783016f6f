"""Exception hierarchy shared by every module."""


class NewtonStrataError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class DomainError(NewtonStrataError, ValueError):
    """Input outside the mathematical domain of an operation."""

    exit_code = 2


class ParseError(NewtonStrataError, ValueError):
    """Malformed serialized document."""

    exit_code = 2

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class PrecisionExhausted(NewtonStrataError, ArithmeticError):
    """A truncated computation ran out of known coefficients."""

    exit_code = 3


class CertificationFailed(NewtonStrataError):
    """A computed invariant failed its consistency checks.

    ``estimate`` carries the best uncertified value, if any.
    """

    exit_code = 3

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class NoConvergence(NewtonStrataError):
    """An iterative or search-based solver found no solution."""

    exit_code = 3


class NotFound(NewtonStrataError):
    """A randomized search exhausted its budget."""

    exit_code = 4


class InternalError(NewtonStrataError, RuntimeError):
    """A theorem-backed expectation was violated; indicates a bug or a broken precondition."""

    exit_code = 1
