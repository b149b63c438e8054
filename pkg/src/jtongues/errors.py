"""Exceptions raised by the numerical routines."""


class NumericFailure(RuntimeError):
    """Base class for failures of a numerical procedure (CLI exit code 2)."""


class StepUnderflow(NumericFailure):
    """Step-size control asked for a step below ``min_step``."""


class DegenerateFit(NumericFailure):
    """Images of the Mobius base points are numerically indistinguishable."""


class BracketFailure(NumericFailure):
    """A boundary root could not be bracketed; carries the partial curve."""

    def __init__(self, message, curve=None):
        super().__init__(message)
        self.curve = curve
