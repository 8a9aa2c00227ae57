"""Exception types shared across the package."""


class KFidelityError(Exception):
    """Base class for all package errors."""


class ModelError(KFidelityError, ValueError):
    """Unknown model id, parameter schema mismatch or momentum dimension mismatch."""


class GaplessError(KFidelityError, ValueError):
    """A state is undefined because the bands touch (|h| = 0)."""


class NotAntipodalError(KFidelityError, ValueError):
    pass


class LinearityError(KFidelityError, ValueError):
    """The varied parameters are not declared linear for the model."""


class VerificationError(KFidelityError, RuntimeError):
    def __init__(self, message, measured=None):
        super().__init__(message)
        self.measured = measured


class ConfigError(KFidelityError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
