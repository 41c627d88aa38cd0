"""Exception and warning types raised across the package."""


class OUSheetError(Exception):
    """Base class for all package errors."""


class DomainError(OUSheetError, ValueError):
    """An argument lies outside the domain of the requested quantity."""


class ConditionDViolation(OUSheetError, ValueError):
    """Point coordinates are not strictly increasing in both axes."""

    def __init__(self, index, axis, message=None):
        self.index = index
        self.axis = axis
        if message is None:
            message = (
                f"point {index}: {axis} coordinate is not strictly greater "
                f"than at point {index - 1}"
            )
        super().__init__(message)


class NonpositiveCoordinate(OUSheetError, ValueError):
    """The first design point has a nonpositive coordinate."""


class DegenerateDesign(OUSheetError, ValueError):
    """A skewed increment alpha*d + beta*delta falls below the allowed floor."""

    def __init__(self, index, value, floor):
        self.index = index
        self.value = value
        self.floor = floor
        super().__init__(
            f"increment {index} has skewed length {value:.3e} below floor {floor:.3e}"
        )


class NotPositiveDefinite(OUSheetError, ValueError):
    """Cholesky factorization failed (colliding points or invalid parameters)."""


class DesignFileError(OUSheetError, ValueError):
    """A design file could not be parsed."""


class NoImprovementWarning(UserWarning):
    """No multistart run improved on its initial design."""


class NonConvergenceWarning(UserWarning):
    """A likelihood fit stopped without meeting its convergence criteria."""
