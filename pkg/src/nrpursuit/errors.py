"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input value is outside the mathematical domain (non-finite, wrong sign)."""


class ConfigError(ValueError):
    """A configuration value or structural precondition is invalid."""


class IntegrationError(RuntimeError):
    """Numerical integration produced a non-finite value.

    Attributes:
        t: simulation time at which the failure occurred, when known.
        step: step index within a scenario run, when known.
    """

    def __init__(self, message: str, t: float | None = None, step: int | None = None):
        super().__init__(message)
        self.t = t
        self.step = step


class SingularJacobianError(RuntimeError):
    """The output Jacobian is singular at the current input.

    Attributes:
        u: the offending input value.
    """

    def __init__(self, message: str, u=None):
        super().__init__(message)
        self.u = u


class TrainingError(RuntimeError):
    """A network update produced a non-finite loss."""
