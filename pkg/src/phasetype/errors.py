"""Exception hierarchy shared by the package."""


class PhaseTypeError(Exception):
    """Base class for all errors raised by ``phasetype``."""


class ValidationError(PhaseTypeError, ValueError):
    """A parameter set violates a structural constraint."""


class DomainError(PhaseTypeError, ValueError):
    """A functional was evaluated outside its support."""


class NumericError(PhaseTypeError, ArithmeticError):
    """A computation produced non-finite or unreliable values."""


class UnsupportedError(PhaseTypeError, ValueError):
    """The requested combination of models or data is not supported."""


class ParseError(PhaseTypeError, ValueError):
    """An input file could not be read or has the wrong layout."""
