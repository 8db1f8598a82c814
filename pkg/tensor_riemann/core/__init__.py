"""
Dense tensor substrate: unfoldings, mode products and contractions.
"""

from .exceptions import (
    DegenerateDesignError,
    DegeneratePointError,
    InvalidArgumentError,
    NumericalFailureError,
    OutOfRangeError,
    TensorError,
)
from .io import load_tensor, save_tensor
from .tensor import (
    DenseTensor,
    Matrix,
    as_tensor,
    contracted_inner,
    flat_data,
    frob_norm,
    inner,
    matricize,
    mode_product,
    multi_mode_product,
    tensorize,
    tucker_rank,
)

__all__ = [
    # Types
    "DenseTensor",
    "Matrix",
    # Operations
    "as_tensor",
    "flat_data",
    "matricize",
    "tensorize",
    "mode_product",
    "multi_mode_product",
    "contracted_inner",
    "inner",
    "frob_norm",
    "tucker_rank",
    # IO
    "save_tensor",
    "load_tensor",
    # Exceptions
    "TensorError",
    "InvalidArgumentError",
    "OutOfRangeError",
    "NumericalFailureError",
    "DegeneratePointError",
    "DegenerateDesignError",
]
