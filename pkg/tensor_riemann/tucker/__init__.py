"""
Tucker decompositions, low-rank approximation and retractions.
"""

from .config import HooiConfig, Retraction
from .decomposition import (
    TuckerTensor,
    hooi,
    hooi_best_approx,
    matrix_svd_projection,
    ohooi,
    project_onto_factors,
    retract,
    sthosvd,
    thosvd,
    validate_rank,
)
from .linalg import (
    TruncatedSVD,
    leading_left_singular_vectors,
    orthonormal_complement,
    orthonormality_error,
    qr_positive,
    random_orthonormal,
    truncated_svd,
)

__all__ = [
    # Types
    "TuckerTensor",
    "TruncatedSVD",
    "Retraction",
    "HooiConfig",
    # Decompositions
    "thosvd",
    "sthosvd",
    "ohooi",
    "hooi",
    "hooi_best_approx",
    "retract",
    "matrix_svd_projection",
    "project_onto_factors",
    "validate_rank",
    # Linear algebra
    "truncated_svd",
    "leading_left_singular_vectors",
    "qr_positive",
    "orthonormal_complement",
    "random_orthonormal",
    "orthonormality_error",
]
