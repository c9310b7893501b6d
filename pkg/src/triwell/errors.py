"""Shared exception types and CLI exit codes."""

EXIT_OK = 0
EXIT_HYPOTHESIS = 2
EXIT_NONCONVERGENCE = 3
EXIT_VERIFICATION = 4


class ConfigurationError(ValueError):
    """A geometric or numerical configuration is invalid (degenerate minima,
    overlapping boundary arcs, epsilon too large for the grid, ...)."""


class HypothesisViolationError(Exception):
    """A structural hypothesis on the potential or its tensions fails.

    ``pair`` names the offending tension pair when applicable.
    """

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class ConvergenceFailureError(Exception):
    """Descent exhausted its budget before meeting the stopping criterion.

    Carries the best iterate (``last``) and the convergence log so callers
    can inspect or restart.
    """

    def __init__(self, message, last=None, log=None):
        super().__init__(message)
        self.last = last
        self.log = log
