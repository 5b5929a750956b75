"""Exception hierarchy shared by every layer.

The CLI maps these onto exit codes, so the split between validation
failures and numeric indeterminacy matters.
"""


class LyapcertError(Exception):
    """Base class for all errors raised by the package."""


class ValidationError(LyapcertError):
    """Input data fails a structural check (stochasticity, multicone, ...)."""


class ReducibleError(ValidationError):
    """A chain that must be irreducible is not."""


class MulticoneError(ValidationError):
    """Some admissible edge violates the strict containment condition."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class NumericError(LyapcertError):
    """A numeric step cannot be decided or carried out at working precision."""


class IndeterminateSignError(NumericError):
    """A sign test landed inside the tolerance band around zero."""


class DomainError(NumericError):
    """A function was evaluated outside its domain (log of 0, |x| >= 1 in artanh, ...)."""


class ParseError(LyapcertError):
    """Malformed expression or system file. ``position`` is a character offset."""

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)
        self.position = position
