"""Exception hierarchy shared by the library and the CLI."""


class LevySympError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigError(LevySympError, ValueError):
    """Invalid configuration or parameters."""


class DomainError(LevySympError, ValueError):
    """Argument outside the domain of an operation (time, channel, interval)."""


class CapabilityError(LevySympError):
    """The system lacks a callback needed by the requested operation."""


class NumericalError(LevySympError, ArithmeticError):
    """Base for failures of the numerical machinery.

    ``time`` is filled in by the integrator when the failure happens inside a
    time loop; ``vertex`` and ``path_index`` are set by the diagnostics.
    """

    exit_code = 2

    def __init__(self, message, *, time=None):
        super().__init__(message)
        self.time = time
        self.vertex = None
        self.path_index = None

    def __str__(self):
        msg = super().__str__()
        extra = []
        if self.time is not None:
            extra.append(f"t={self.time!r}")
        if self.vertex is not None:
            extra.append(f"vertex={self.vertex}")
        if self.path_index is not None:
            extra.append(f"path={self.path_index}")
        return f"{msg} ({', '.join(extra)})" if extra else msg


class SolverError(NumericalError):
    """Fixed-point iteration of the implicit momentum update did not converge."""

    def __init__(self, message, *, iterations, residual, time=None):
        super().__init__(message, time=time)
        self.iterations = iterations
        self.residual = residual


class DivergenceError(NumericalError):
    """A state became non-finite."""

    def __init__(self, message, *, substep=None, time=None):
        super().__init__(message, time=time)
        self.substep = substep


class StepSizeWarning(UserWarning):
    """The drift step exceeds the bound under which order-1 convergence is known."""
