"""Exception and warning types shared across the package."""


class TransferError(Exception):
    """Base class for all package errors."""


class ParameterError(TransferError, ValueError):
    """An argument is outside its documented range."""


class DomainError(TransferError, ValueError):
    """The input is not a physical (bona fide) object."""


class NumericError(TransferError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance.

    ``achieved`` carries the best tolerance that was actually reached, when known.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class TruncationError(NumericError):
    """Fock or series cutoffs are too small for the requested accuracy."""


class CutoffError(TruncationError):
    """A table or state does not extend far enough for an index shift or tail bound."""


class SamplingError(TransferError, RuntimeError):
    """Random sampling did not produce an acceptable draw."""


class ConsistencyError(TransferError, AssertionError):
    """A structural prediction was violated (e.g. a non X-shaped qubit state)."""


class TruncationWarning(UserWarning):
    """The diagonal of a coefficient table does not sum to one within tolerance."""

    def __init__(self, message, deficit=None):
        super().__init__(message)
        self.deficit = deficit
