"""
Exception classes for rsfsmooth.

Every error raised on purpose by the library derives from RSFError, so callers
can catch the whole family at once. The classes also subclass the matching
builtin (ValueError, OSError, ArithmeticError) so plain `except ValueError`
keeps working.

The CLI maps each class to an exit code:

    ParameterError / ConfigError / UsageError       -> 2
    DimensionError                                  -> 2
    DataError                                       -> 3
    NumericError and subclasses                     -> 4
    CapabilityError                                 -> 5
    anything else (reported as error[internal])     -> 1
"""


class RSFError(Exception):
    """Base class for all rsfsmooth errors."""

    exit_code = 1
    kind = "error"


class ParameterError(RSFError, ValueError):
    """Invalid argument value (negative q, empty label set, odd n*k, ...)."""

    exit_code = 2
    kind = "config"


class ConfigError(ParameterError):
    """Conflicting or unparseable settings from flags / config file."""


class UsageError(ParameterError):
    """Unknown subcommand or flag, or a flag value of the wrong type."""

    kind = "parse"


class DimensionError(ParameterError):
    """Signal length does not match the graph."""


class DataError(RSFError, OSError):
    """Unreadable or malformed input file."""

    exit_code = 3
    kind = "data"

    def __init__(self, message, path=None, line=None):
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(f"{location}{message}")
        self.path = path
        self.line = line


class NumericError(RSFError, ArithmeticError):
    """A computation could not produce a usable number."""

    exit_code = 4
    kind = "numeric"


class DegenerateSmootherError(NumericError):
    """LOOCV diagonal entry equal to one (no leave-one-out information)."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class TuningError(NumericError):
    """Every grid candidate was degenerate."""


class SingularReductionError(NumericError):
    """Interpolation reduction with a zero diagonal entry and no fallback."""


class StepBudgetError(NumericError):
    """A forest walk exceeded the step budget."""


class CapabilityError(RSFError):
    """Request exceeds what this build supports (dense size caps, ...)."""

    exit_code = 5
    kind = "capability"
