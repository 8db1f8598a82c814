"""
Configuration for Tucker approximation routines.
"""

from dataclasses import dataclass
from enum import Enum


class Retraction(str, Enum):
    """Map from an ambient update back to the bounded Tucker-rank set."""

    THOSVD = "thosvd"
    STHOSVD = "sthosvd"
    MATRIX_SVD = "matrix_svd"


@dataclass
class HooiConfig:
    """Settings for converged HOOI used as the best-approximation surrogate."""

    max_sweeps: int = 100
    """Upper bound on alternating sweeps per restart."""

    restarts: int = 10
    """Number of starting factor sets; the first is the T-HOSVD factors."""

    tol: float = 1e-12
    """Stop a restart once the objective changes by less than ``tol * ||t||_F``."""

    seed: int = 0

    def __post_init__(self):
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.tol < 0:
            raise ValueError("tol must be non-negative")
