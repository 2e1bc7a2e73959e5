"""Exception types shared across the package.

Bad arguments raise plain ``ValueError``; these cover failures of the
numerics themselves.
"""


class NumericError(RuntimeError):
    """A numerical routine failed to converge or lost accuracy."""


class StepSizeError(NumericError):
    """Time integration drifted off the unit sphere; carries a suggested dt."""

    def __init__(self, message, suggested_dt=None):
        super().__init__(message)
        self.suggested_dt = suggested_dt


class CapabilityError(RuntimeError):
    """The requested problem is too large for dense treatment."""
