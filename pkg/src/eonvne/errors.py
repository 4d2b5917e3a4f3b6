class EonError(Exception):
    """Base class for all package errors."""


class ParseError(EonError):
    pass


class ValidationError(EonError):
    pass


class OverlapError(EonError):
    """A commit touched slices that are already owned; indicates a solver bug."""


class BudgetExceeded(EonError):
    pass
