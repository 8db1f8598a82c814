"""
Low-degree polynomial hardness calculator.
"""

from .hermite import (
    HermiteDegreeProfile,
    correlated_expectation,
    hermite,
    mc_verify_expectation,
    normalized_hermite,
    random_profile,
)
from .threshold import (
    GAP_TABLE_COLUMNS,
    gap_table,
    ld_advantage_bound,
    ld_sample_threshold,
)

__all__ = [
    # Hermite polynomials
    "hermite",
    "normalized_hermite",
    "HermiteDegreeProfile",
    "correlated_expectation",
    "mc_verify_expectation",
    "random_profile",
    # Thresholds
    "ld_sample_threshold",
    "ld_advantage_bound",
    "gap_table",
    "GAP_TABLE_COLUMNS",
]
