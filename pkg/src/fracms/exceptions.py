"""Exception types raised by the solvers and the problem catalog."""


class FracMSError(Exception):
    """Base class for all package errors."""


class HistoryLengthError(FracMSError, ValueError):
    """A Caputo history outgrew the L1 weights allocated for it."""


class UnsupportedCaseError(FracMSError, ValueError):
    pass


class NonConvergenceError(FracMSError, RuntimeError):
    """A root solve or a periodic shooting loop failed to converge.

    ``last_iterate`` and ``residual`` describe the final state of the
    failed iteration; ``residual_history`` is filled by the shooting
    solver so callers can tell a slow contraction (small g_min) from a
    genuinely divergent cell.
    """

    def __init__(self, message, *, last_iterate=None, residual=None,
                 residual_history=None, index=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual
        self.residual_history = residual_history
        self.index = index


class DivergenceError(FracMSError, FloatingPointError):
    """The solver state became non-finite at step ``index``."""

    def __init__(self, message, *, index=None):
        super().__init__(message)
        self.index = index


class ProbeError(FracMSError, ValueError):
    """An assumption probe hit a non-finite function value."""

    def __init__(self, message, *, point=None):
        super().__init__(message)
        self.point = point
