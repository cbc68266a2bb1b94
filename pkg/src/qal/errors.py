"""Exception hierarchy. Each class carries a distinct CLI exit code."""


class QalError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigurationError(QalError):
    """Bad configuration input: unknown key, malformed value, mismatched grids."""

    exit_code = 2


class ParameterError(QalError):
    """A function argument is outside its documented domain."""

    exit_code = 3


class ContractViolationError(QalError):
    """Array shapes or lengths do not match the owning grid."""

    exit_code = 4


class DegenerateStateError(QalError):
    """Operation on a zero-norm wavefunction."""

    exit_code = 5


class NumericalBlowupError(QalError):
    """NaN or Inf appeared during time stepping."""

    exit_code = 6

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class SingularSystemError(QalError):
    """Zero pivot in a tridiagonal solve."""

    exit_code = 7


class ClassificationUnavailableError(QalError):
    """Tail fits failed on both sides; no regime label can be assigned."""

    exit_code = 8
