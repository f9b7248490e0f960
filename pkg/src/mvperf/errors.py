"""Exception types shared across the package."""


class MVPerfError(Exception):
    """Base class for all errors raised by mvperf."""


class DataError(MVPerfError):
    """Malformed or inconsistent multi-view data."""


class DimensionMismatch(MVPerfError):
    """Weights, tuples or datasets whose shapes do not agree."""


class MeasureError(MVPerfError):
    """Unknown measure, inadmissible table or degenerate loss evaluation."""


class SearchError(MVPerfError):
    """The constraint search has no admissible candidate."""


class SolverError(MVPerfError):
    """The inner QP solver failed to reach its tolerance.

    The best iterate and its KKT residual are attached so callers can decide
    whether to keep going.
    """

    def __init__(self, message, alpha=None, residual=None):
        super().__init__(message)
        self.alpha = alpha
        self.residual = residual
