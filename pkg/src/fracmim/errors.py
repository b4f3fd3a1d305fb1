"""Exception hierarchy for the fracmim solver."""


class FracmimError(Exception):
    """Base class for all fracmim errors."""


class DimensionError(FracmimError, ValueError):
    """Array length or matrix dimension mismatch."""


class ParameterError(FracmimError, ValueError):
    """Scalar parameter outside its admissible range."""


class DomainError(FracmimError, ValueError):
    """Power-law base or function argument outside the defined domain."""


class IndexRangeError(FracmimError, IndexError):
    """Node or coefficient index outside the valid range."""


class HistoryError(FracmimError, RuntimeError):
    """Half-step history shorter than the range a Caputo sum requires."""


class SingularMatrixError(FracmimError, RuntimeError):
    """Factorization hit a pivot below the singularity tolerance."""


class IterationLimitError(FracmimError, RuntimeError):
    """Iterative solve exhausted its budget without reaching tolerance.

    Carries the best iterate and its relative residual so callers can
    inspect how far the solve got.
    """

    def __init__(self, message, best_x=None, residual=None, iterations=None):
        super().__init__(message)
        self.best_x = best_x
        self.residual = residual
        self.iterations = iterations


class QuadratureError(FracmimError, RuntimeError):
    """Quadrature failed to reach the requested accuracy.

    Carries the residual estimate of the last refinement step.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class StepFailureError(FracmimError, RuntimeError):
    """A linear solve inside the time march failed.

    Records the half-step level at which the march aborted.
    """

    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level
