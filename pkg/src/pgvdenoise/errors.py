"""Exception hierarchy shared by all modules."""


class PGVError(Exception):
    """Base class for every typed error raised by the package."""


class DimensionError(PGVError, ValueError):
    pass


class NonFiniteError(PGVError, ValueError):
    pass


class DimensionMismatch(PGVError, ValueError):
    pass


class ParameterError(PGVError, ValueError):
    """A scalar parameter lies outside its admissible range."""


class NonFiniteIterate(PGVError, FloatingPointError):
    """The primal-dual iteration produced NaN/Inf (step-size bound violated)."""


class FormatError(PGVError, ValueError):
    pass


class ParseError(PGVError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownKeyError(ParseError):
    pass


class EvaluationError(PGVError, RuntimeError):
    """A grid-search evaluation failed; the message names the parameter tuple."""
