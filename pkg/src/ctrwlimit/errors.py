"""Exception hierarchy. The CLI maps each class to an exit code."""


class CTRWError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(CTRWError, ValueError):
    """Invalid model parameters or run configuration.

    ``field`` names the offending parameter when there is one.
    """

    exit_code = 2

    def __init__(self, message, field=None):
        if field is not None and field not in message:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field


class UnsupportedModelError(CTRWError, NotImplementedError):
    """The requested quantity has no closed form for this model."""

    exit_code = 2


class HorizonError(CTRWError, ValueError):
    """A query lies beyond the finite horizon of a path or realization."""

    exit_code = 3


class NumericalError(CTRWError, ArithmeticError):
    """A numerical routine failed to converge; ``diagnostics`` holds details."""

    exit_code = 3

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class BudgetError(CTRWError, RuntimeError):
    """A step or cell budget was exhausted (usually a misconfigured scale)."""

    exit_code = 4
