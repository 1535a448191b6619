"""Exception hierarchy shared across the package.

The CLI maps these onto its exit-code contract: validation problems exit
with 2, capacity limits with 3, numeric failures with 4.
"""


class LifemomentsError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(LifemomentsError, ValueError):
    """An argument, parameter set, or configuration is invalid."""


class UnsupportedModelError(ValidationError):
    """The operation is not defined for this model kind.

    Raised e.g. when an exact finite-support evaluation is requested for a
    model with infinite support; the message names the alternative entry
    point.
    """


class CapacityError(LifemomentsError):
    """The problem size exceeds a documented combinatorial cap."""


class NumericError(LifemomentsError):
    """A numeric failure: threshold underflow, infinite moment, instability."""


class ConvergenceError(NumericError):
    """An iterative search did not converge within its iteration cap."""
