"""Exception types raised by the solvers."""


class BracketError(ValueError):
    """The supplied interval does not bracket a sign change."""


class EvaluationError(ArithmeticError):
    """A function evaluation returned NaN or inf."""


class DegenerateProfileError(ValueError):
    """The profile is identically zero (or otherwise unusable) where a
    nonzero one is required."""


class StepSizeError(RuntimeError):
    """The iterative solver diverged; reduce the step size."""
