"""Exception hierarchy.

Every error carries a short ``category`` used by the command line front end
to report a diagnostic and choose an exit code.
"""


class PieError(Exception):
    category = "error"
    exit_code = 1


class InputError(PieError, ValueError):
    category = "input"
    exit_code = 2


class ConfigError(InputError):
    category = "config"
    exit_code = 3


class ConversionError(PieError):
    """Raised when a PDE cannot be turned into a PIE (singular ``B_T``)."""

    category = "conversion"
    exit_code = 4

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class IntegrationError(PieError):
    category = "integration"
    exit_code = 5
