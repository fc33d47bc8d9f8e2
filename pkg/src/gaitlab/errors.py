"""Exception types shared across the package."""


class GaitlabError(Exception):
    """Base class for package errors."""


class ConfigError(GaitlabError, ValueError):
    """Invalid configuration or arguments."""


class InfeasibleGaitError(GaitlabError, ValueError):
    """Requested gait parameters outside the feasible range."""


class ModelConstructionError(GaitlabError, RuntimeError):
    """Model assembly produced an unexpected structure."""


class NumericalError(GaitlabError, RuntimeError):
    """A numerical routine failed to converge or solve."""


class DareConvergenceError(NumericalError):
    """Riccati iteration did not converge; carries the last residual."""

    def __init__(self, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"DARE iteration did not converge after {iterations} iterations "
            f"(residual {residual:.3e})"
        )


class ProjectionSingularError(NumericalError):
    """The time-projection block system is singular at the queried instant."""
