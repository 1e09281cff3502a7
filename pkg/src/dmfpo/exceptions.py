"""Exception types raised by dmfpo."""


class DMFPOError(Exception):
    """Base class for all package errors."""


class NonHermitianInput(DMFPOError, ValueError):
    pass


class BadQubitIndex(DMFPOError, ValueError):
    pass


class InvalidDensity(DMFPOError, ValueError):
    pass


class NoPeriodFound(DMFPOError, RuntimeError):
    pass


class GammaOutOfRange(DMFPOError, ValueError):
    pass


class EvalError(DMFPOError, ValueError):
    pass


class UnsupportedSystem(DMFPOError, ValueError):
    pass


class ParseError(DMFPOError, ValueError):
    """Malformed sequence text; carries a 1-based line and column."""

    def __init__(self, message, line=0, column=0):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class InsufficientData(DMFPOError, ValueError):
    pass


class SingularJacobian(DMFPOError, RuntimeError):
    """Raised by the fitter; ``result`` holds the best iterate reached."""

    def __init__(self, message, result=None):
        self.result = result
        super().__init__(message)


class DegenerateReference(DMFPOError, ValueError):
    pass


class ConfigError(DMFPOError, ValueError):
    pass
