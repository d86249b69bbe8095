"""Exception hierarchy shared by all bernband modules."""


class BernbandError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BernbandError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class ParameterError(BernbandError, ValueError):
    """Inconsistent operator or estimator parameters (e.g. degree m <= order k)."""


class PreconditionError(BernbandError, ValueError):
    """A stated sample-size or shape precondition fails.

    ``constraint`` names the violated inequality so callers (and the CLI)
    can surface it verbatim.
    """

    def __init__(self, message, constraint=""):
        super().__init__(message)
        self.constraint = constraint


class DegreeSearchError(BernbandError, RuntimeError):
    """No admissible degree satisfied the selection conditions below the cap.

    Carries the :class:`~bernband.confidence.DegreeSearchReport` with the
    residual trace of the failed scan.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class QuadratureError(BernbandError, ArithmeticError):
    """Inner quadrature did not converge; carries the achieved error estimate."""

    def __init__(self, message, error_estimate=float("nan")):
        super().__init__(message)
        self.error_estimate = error_estimate


class InputFormatError(BernbandError, ValueError):
    """Malformed observation file; ``line_numbers`` lists offending lines."""

    def __init__(self, message, line_numbers=()):
        super().__init__(message)
        self.line_numbers = tuple(line_numbers)
