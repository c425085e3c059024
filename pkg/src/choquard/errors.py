"""Exception hierarchy shared by all modules."""


class ChoquardError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ChoquardError, ValueError):
    """An argument lies outside the domain of the operation."""


class SingularityError(ChoquardError, ValueError):
    """The operation was evaluated at a kernel singularity."""


class DegenerateInputError(ChoquardError, ValueError):
    """Input is identically zero (or otherwise degenerate) where that is not allowed."""


class IntegrationError(ChoquardError, RuntimeError):
    """The ODE integrator failed; ``state`` holds the last accepted state."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class NoPositiveLambda(ChoquardError, ValueError):
    """A zero crossing with U(r0) <= 1 cannot be rescaled to a ball ground state."""


class BracketError(ChoquardError, RuntimeError):
    """The amplitude scan found no sign change of the shooting map."""


class ConvergenceError(ChoquardError, RuntimeError):
    """An iterative procedure stopped before meeting its tolerance.

    ``diagnostics`` carries whatever the procedure recorded (residual history,
    best bracket, tail values).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
