"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 1)."""


class DataError(ValueError):
    """Unusable input data (CLI exit code 2)."""


class ParseError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyInputError(DataError):
    pass


class StratificationError(DataError):
    pass


class NumericError(ArithmeticError):
    """Numerical failure (CLI exit code 3)."""


class DegenerateSigmaError(NumericError):
    pass


class RankError(NumericError):
    """A requested direction lies in the numerical null space."""
