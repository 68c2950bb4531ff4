"""Exception hierarchy shared by the solvers and the command-line front end."""


class CoupledMDPError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(CoupledMDPError, ValueError):
    """Model or uncertainty data violates an invariant."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class UnsupportedInputError(CoupledMDPError, ValueError):
    """A solver was called on an input class it does not handle."""


class ConvergenceError(CoupledMDPError, RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance."""

    def __init__(self, message, gap=float("nan")):
        super().__init__(message)
        self.gap = gap


class SizeCapError(CoupledMDPError, ValueError):
    """An exhaustive oracle refused an instance larger than its cap."""


class NotInSetError(CoupledMDPError, ValueError):
    """A parameter is not a nominal-vertex blend of the uncertainty set."""
