"""
Measurement operators, synthetic problem instances and isometry diagnostics.
"""

from .design import DesignKind, LinearDesign, adjoint, apply, vector_design_matrix
from .instance import (
    InstanceMetadata,
    ProblemInstance,
    degrees_of_freedom,
    generate_gaussian_instance,
    load_instance,
    min_mode_singular_value,
    relative_error,
    save_instance,
)
from .trip import TripEstimate, estimate_trip, random_unit_tucker

__all__ = [
    # Types
    "DesignKind",
    "LinearDesign",
    "ProblemInstance",
    "InstanceMetadata",
    "TripEstimate",
    # Operator
    "apply",
    "adjoint",
    "vector_design_matrix",
    # Instances
    "generate_gaussian_instance",
    "save_instance",
    "load_instance",
    "degrees_of_freedom",
    "min_mode_singular_value",
    "relative_error",
    # Diagnostics
    "estimate_trip",
    "random_unit_tucker",
]
