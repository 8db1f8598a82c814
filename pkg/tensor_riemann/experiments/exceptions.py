"""
Exceptions for the experiment harness.
"""


class ExperimentError(Exception):
    """Base exception for experiment errors."""

    def __init__(self, message: str, experiment: str = None):
        super().__init__(message)
        self.message = message
        self.experiment = experiment

    def __str__(self):
        if self.experiment:
            return f"[{self.experiment}] {self.message}"
        return self.message


class ConfigValidationError(ExperimentError):
    """Raised when an experiment configuration is invalid."""

    def __init__(self, message: str, field: str = None, experiment: str = None):
        super().__init__(message, experiment=experiment)
        self.field = field

    def __str__(self):
        base = super().__str__()
        if self.field:
            return f"{base} (field: {self.field})"
        return base


class ExperimentIOError(ExperimentError):
    """Raised when reading a config or writing results fails."""

    def __init__(self, message: str, path: str = None, experiment: str = None):
        super().__init__(message, experiment=experiment)
        self.path = path
