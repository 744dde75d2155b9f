"""Exception hierarchy shared by all modules.

The CLI maps the three top-level families onto exit codes: parameter
problems (2), numerical or consistency failures (3) and resource budget
violations (4).
"""


class LocalEntError(Exception):
    """Base class for all errors raised by :mod:`localent`."""

    exit_code = 3


class ParameterError(LocalEntError, ValueError):
    """An input lies outside the domain an operation supports."""

    exit_code = 2


class DomainError(ParameterError):
    """A scalar argument lies outside the function's mathematical domain."""


class UnsupportedError(ParameterError):
    """The requested quantity is not defined for this kind of input."""


class RegionError(ParameterError):
    """A filtering region is empty, degenerate or too large."""


class ContainmentError(ParameterError):
    """A state is not contained within the supplied grid."""


class NumericalError(LocalEntError, ArithmeticError):
    """A computation did not reach its stated accuracy."""

    exit_code = 3


class ConsistencyError(NumericalError):
    """A result violates an invariant by more than roundoff allows."""


class InvalidStateError(ConsistencyError):
    """A matrix is not a valid (Hermitian, PSD, unit-trace) state."""


class NoiseDominatedError(NumericalError):
    """Finite-difference refinements disagree; the estimate is noise."""


class ResolutionError(NumericalError):
    """A grid is too coarse for the requested quantity."""


class BudgetError(LocalEntError):
    """A grid or matrix exceeds the configured size budget."""

    exit_code = 4
