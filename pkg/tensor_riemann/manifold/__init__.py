"""
Geometry of the fixed-Tucker-rank manifold at a base point.
"""

from .gauge import (
    DEGENERACY_TOL,
    Gauge,
    compute_gauge,
    core_perturbation,
    project_tangent,
    project_tangent_complement,
    project_tangent_general,
)
from .tangent import (
    TangentVector,
    dense_to_tangent,
    tangent_basis,
    tangent_dimension,
    tangent_to_dense,
)

__all__ = [
    "Gauge",
    "TangentVector",
    "DEGENERACY_TOL",
    "compute_gauge",
    "project_tangent",
    "project_tangent_complement",
    "project_tangent_general",
    "core_perturbation",
    "tangent_to_dense",
    "dense_to_tangent",
    "tangent_dimension",
    "tangent_basis",
]
