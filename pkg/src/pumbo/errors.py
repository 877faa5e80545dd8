"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class PumboError(Exception):
    exit_code = 1


class ConfigError(PumboError, ValueError):
    """Invalid parameters or preconditions (bad N, unknown kernel, ...)."""

    exit_code = 1


class DataError(PumboError, ValueError):
    """Malformed or inconsistent input data."""

    exit_code = 2


class NumericalError(PumboError, ArithmeticError):
    exit_code = 3


class IllConditioned(NumericalError):
    """Kernel system could not be factorized even at the largest jitter."""


class SubdomainSearchFailed(NumericalError):
    """Every BO trial of a subdomain failed; ``trace`` holds what was tried."""

    def __init__(self, message, subdomain=None, trace=None):
        super().__init__(message)
        self.subdomain = subdomain
        self.trace = trace
