"""Exception types shared across the package."""


class DarwinSimError(Exception):
    """Base class for all package-specific errors."""


class CoincidentParticlesError(DarwinSimError):
    """Two points coincide exactly where a finite separation is required."""


class VelocityCapExceededError(DarwinSimError):
    """A particle speed violates the non-relativistic validity cap."""


class NotPositiveDefiniteError(DarwinSimError):
    """The velocity-coupling matrix is not positive definite.

    Signals that particles are too close / the magnetic coupling is too
    strong for the order-(v/c)^2 expansion to be meaningful.
    """


class SolverDidNotConvergeError(DarwinSimError):
    """A linear solve failed to meet the requested residual tolerance."""


class FixedPointDidNotConvergeError(DarwinSimError):
    """Implicit stage iteration exceeded its iteration budget."""


class IntegrationAbortedError(DarwinSimError):
    """Integration stopped early; carries the partial trajectory.

    Attributes:
        step_index: zero-based index of the step that failed.
        trajectory: partial Trajectory recorded up to the failure.
        cause: the underlying numerical error.
    """

    def __init__(self, step_index, cause, trajectory):
        super().__init__(f"integration aborted at step {step_index}: {cause}")
        self.step_index = step_index
        self.cause = cause
        self.trajectory = trajectory


class NonzeroNetChargeError(DarwinSimError):
    """Periodic Poisson problem with nonzero net charge has no solution."""


class GridMismatchError(DarwinSimError):
    """Two grids that must share shape and spacing do not."""


class ThinWireAssumptionViolated(DarwinSimError):
    """Wire radius too large for the thin straight-wire inductance model."""


class ScenarioSyntaxError(DarwinSimError):
    """Scenario text is not well-formed; carries line/column when known."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class ScenarioValidationError(DarwinSimError):
    """A scenario field violates a documented constraint."""
