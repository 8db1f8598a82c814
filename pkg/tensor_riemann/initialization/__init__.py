"""
Spectral initializations for the Riemannian solvers.
"""

from .spectral import (
    init_matrix_trace,
    init_scalar_on_tensor,
    init_tensor_on_vector,
    spectral_initialization,
)

__all__ = [
    "init_scalar_on_tensor",
    "init_tensor_on_vector",
    "init_matrix_trace",
    "spectral_initialization",
]
