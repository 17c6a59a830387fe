"""Exception hierarchy shared by the library and the command line."""


class TrioscError(Exception):
    """Base class for all errors raised by triosc."""


class InvalidInputError(TrioscError, ValueError):
    """Non-finite, out-of-range or otherwise malformed input."""


class UnsupportedRegimeError(TrioscError):
    """A closed-form path was asked for outside its domain of validity."""


class ConvergenceError(TrioscError):
    """A numerical procedure did not reach its accuracy target.

    ``residual`` carries the achieved error measure.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class UndefinedValueError(TrioscError, ZeroDivisionError):
    """A normalised quantity has a vanishing denominator."""


class TruncationError(TrioscError):
    """Truncated Fock space too small for the requested evolution."""

    def __init__(self, message, tail=None, suggested_cutoff=None):
        super().__init__(message)
        self.tail = tail
        self.suggested_cutoff = suggested_cutoff


class NMaxTooSmallError(TrioscError):
    """Photon-number distribution leaves too much probability above n_max."""

    def __init__(self, message, tail=None):
        super().__init__(message)
        self.tail = tail
