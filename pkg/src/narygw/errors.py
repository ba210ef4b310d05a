"""Exception hierarchy shared by all modules."""


class NarygwError(Exception):
    """Base class for every error raised by this package."""


class ParamOutOfRange(NarygwError, ValueError):
    pass


class PmfNotNormalized(NarygwError, ValueError):
    pass


class DomainError(NarygwError, ValueError):
    pass


class UnsupportedFamily(NarygwError, ValueError):
    pass


class TruncationMismatch(NarygwError, ValueError):
    pass


class TooLarge(NarygwError, ValueError):
    pass


class NumericalError(NarygwError, ArithmeticError):
    """A solver failed to reach its tolerance."""


class NoConvergence(NumericalError):
    pass


class BudgetDominated(NarygwError, RuntimeError):
    """Too many Monte Carlo replicates hit the node budget.

    The offending summary is attached as ``summary`` so callers can still
    inspect it.
    """

    def __init__(self, message, summary=None):
        super().__init__(message)
        self.summary = summary
