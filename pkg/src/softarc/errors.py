"""Exception types raised by the softarc library."""


class SoftarcError(Exception):
    """Base class for all library-specific errors."""


class EvaluationError(SoftarcError):
    """A user-supplied function returned a non-finite value."""


class SingularInertiaError(SoftarcError):
    """The inertia matrix was not symmetric positive definite."""


class NonConvergenceError(SoftarcError):
    """An iterative solver failed to reach its tolerance.

    Carries the last iterate so callers can inspect or restart.
    """

    def __init__(self, message, last_iterate=None, residual_norm=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual_norm = residual_norm


class NotAnEquilibriumError(SoftarcError):
    """A configuration handed to a stability routine is not an equilibrium."""


class UnattainableEquilibriumError(SoftarcError):
    """The requested rest configuration cannot be held by the actuators."""


class SingularStiffnessError(SoftarcError):
    """The configuration-space stiffness matrix is singular."""


class RankDeficiencyError(SoftarcError):
    """A matrix that must have full rank does not.

    The offending singular values are attached for diagnosis.
    """

    def __init__(self, message, singular_values=None):
        super().__init__(message)
        self.singular_values = singular_values


class ScenarioError(SoftarcError):
    """A scenario file failed validation.

    `field` is a dotted path into the document ("model.segments[0].L_m"),
    `line` is the 1-based line number when the underlying parser provides one.
    """

    def __init__(self, message, field=None, line=None):
        detail = message
        if field is not None:
            detail = f"{field}: {message}"
        if line is not None:
            detail = f"line {line}: {detail}"
        super().__init__(detail)
        self.field = field
        self.line = line
