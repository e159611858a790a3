"""Exception hierarchy shared by all modules."""


class SpecFnError(Exception):
    """Base class for every error raised by :mod:`specfn`."""


class InputError(SpecFnError, ValueError):
    """Malformed or out-of-contract input (non-symmetric matrix, bad flag, ...)."""


class NumericalError(SpecFnError, ArithmeticError):
    """An algorithm failed to converge or hit a singular configuration."""


class DomainError(SpecFnError, ArithmeticError):
    """A function was evaluated outside its domain, e.g. ``log`` of a negative."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class ExprSyntaxError(SpecFnError, ValueError):
    """Syntax error in a diagonal-function expression; ``offset`` is a byte index."""

    def __init__(self, message, offset, source=""):
        super().__init__(f"{message} at offset {offset}")
        self.msg = message
        self.offset = offset
        self.source = source


class OrderCapError(SpecFnError, ValueError):
    """Requested derivative order exceeds the configured cap."""
