"""Exception types shared across the library."""


class DcclabError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(DcclabError, ValueError):
    """An input violates a documented precondition or invariant."""


class FormatError(DcclabError, ValueError):
    """A file could not be parsed; the message names the offending row."""


class InsufficientDataError(DcclabError, ValueError):
    """Too few observations for the requested computation."""


class AlignmentError(DcclabError, ValueError):
    """Two panels share no dates, so no joint calendar exists."""


class StationarityError(DcclabError, ValueError):
    """Parameters lie outside the covariance-stationary region."""


class DegeneracyError(DcclabError, ArithmeticError):
    """A matrix that must be positive (semi)definite is not."""


class FitError(DcclabError, RuntimeError):
    """Estimation failed.  ``best`` carries the best state reached, if any."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
