class InputError(ValueError):
    """Invalid argument passed to a library routine."""


class ConfigurationError(ValueError):
    """An experiment or population cannot be resolved as configured."""


class NumericalError(ArithmeticError):
    """A numerical routine failed; ``diagnostics`` carries the details."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
