"""Exception hierarchy shared by every module.

Each error carries the CLI exit code it maps to: 2 for bad input or usage,
3 for data that is well-formed but degenerate.
"""


class CamouflageError(Exception):
    exit_code = 2


class InvalidInput(CamouflageError, ValueError):
    pass


class ParseError(CamouflageError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(CamouflageError):
    pass


class DuplicateError(CamouflageError):
    pass


class DegenerateDataError(CamouflageError):
    exit_code = 3


class DegenerateVector(DegenerateDataError):
    pass


class DegenerateMean(DegenerateDataError):
    pass


class DegenerateDirectory(DegenerateDataError):
    pass


class DegenerateDistribution(DegenerateDataError):
    pass


class CollapseWarning(UserWarning):
    """Every candidate mixture order collapsed to fewer than two clusters."""
