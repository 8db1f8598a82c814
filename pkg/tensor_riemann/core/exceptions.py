"""
Exceptions shared by the numerical layers.
"""


class TensorError(Exception):
    """Base exception for numerical library errors."""

    def __init__(self, message: str, operation: str = None):
        super().__init__(message)
        self.message = message
        self.operation = operation

    def __str__(self):
        if self.operation:
            return f"[{self.operation}] {self.message}"
        return self.message


class InvalidArgumentError(TensorError):
    """Raised when an argument violates an operation's preconditions."""

    def __init__(self, message: str, operation: str = None, field: str = None):
        super().__init__(message, operation=operation)
        self.field = field


class OutOfRangeError(InvalidArgumentError):
    """Raised when a numeric parameter lies outside its supported range."""

    pass


class NumericalFailureError(TensorError):
    """Raised when a factorization or solve fails to produce a usable result."""

    def __init__(self, message: str, operation: str = None, cause: Exception = None):
        super().__init__(message, operation=operation)
        self.cause = cause


class DegeneratePointError(TensorError):
    """Raised when a Tucker point has a rank-deficient core matricization."""

    def __init__(self, message: str, operation: str = None, mode: int = None):
        super().__init__(message, operation=operation)
        self.mode = mode

    def __str__(self):
        base = super().__str__()
        if self.mode is not None:
            return f"{base} | mode={self.mode}"
        return base


class DegenerateDesignError(TensorError):
    """Raised when a measurement design is too ill-conditioned for a closed form."""

    pass
