"""
Riemannian gradient descent and Gauss-Newton solvers, plus comparison baselines.
"""

from .baselines import (
    FactoredState,
    factored_gd_step,
    pgd_step,
    select_baseline_stepsize,
)
from .config import Algorithm, SolverConfig
from .gauss_newton import (
    closed_form_vector_update,
    least_squares,
    rgn_step,
    rgn_step_vector_closed_form,
    rgn_tangent_update,
)
from .gradient import (
    euclidean_gradient,
    exact_line_search_stepsize,
    loss,
    rgd_step,
    riemannian_gradient,
)
from .solve import RiemannianSolver, pad_to_rank, solve
from .trace import IterationRecord, RunTrace, TerminationReason

__all__ = [
    # Configuration and records
    "Algorithm",
    "SolverConfig",
    "IterationRecord",
    "RunTrace",
    "TerminationReason",
    # Objective
    "loss",
    "euclidean_gradient",
    "riemannian_gradient",
    "exact_line_search_stepsize",
    # Steps
    "rgd_step",
    "rgn_step",
    "rgn_tangent_update",
    "rgn_step_vector_closed_form",
    "closed_form_vector_update",
    "least_squares",
    "pgd_step",
    "factored_gd_step",
    "FactoredState",
    "select_baseline_stepsize",
    # Driver
    "RiemannianSolver",
    "solve",
    "pad_to_rank",
]
