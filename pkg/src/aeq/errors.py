"""Exception hierarchy for the aeq toolkit."""


class AeqError(Exception):
    """Base class for all toolkit errors."""


class InputError(AeqError):
    """A scenario or argument violates a documented precondition."""


class IntegrationFailure(AeqError):
    """The ODE integrator could not complete the requested span."""

    def __init__(self, message, last_t=None):
        super().__init__(message)
        self.last_t = last_t


class SingularMatrixError(AeqError):
    """A matrix that must be invertible is numerically singular."""


class NonConvergenceError(AeqError):
    """The successive-approximation series failed to contract."""


class BoundViolationError(AeqError):
    """A computed trajectory escaped its certified a-priori bound.

    Usually means the supplied decay certificate does not actually bound
    the Lipschitz envelope it claims to."""


class GlueMismatchError(AeqError):
    """The two half-axis constructions disagree on the overlap region.

    Signals broken parity of the coupling matrix or an overly tight
    tolerance; the measured mismatch is attached.
    """

    def __init__(self, message, mismatch):
        super().__init__(message)
        self.mismatch = mismatch


class ScenarioError(InputError):
    """Scenario text is malformed; carries a 1-based source location."""

    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
