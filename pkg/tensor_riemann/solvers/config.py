"""
Solver configuration.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

from ..tucker.config import Retraction


class Algorithm(str, Enum):
    """Iteration driven by :func:`~tensor_riemann.solvers.solve.solve`."""

    RGD = "rgd"  # Riemannian gradient descent, exact line search stepsize
    RGN = "rgn"  # Riemannian Gauss-Newton
    PGD = "pgd"  # ambient gradient step then retraction
    FACTORED_GD = "factored_gd"  # gradient descent on core and factors jointly


@dataclass
class SolverConfig:
    """Configuration for one solver run."""

    algorithm: Algorithm = Algorithm.RGN
    input_rank: Tuple[int, ...] = (1,)
    """Tucker rank ``r`` of the iterates; may exceed the true rank."""

    max_iters: int = 300
    tol_rel_rmse: float = 1e-13
    """Stop once the relative error, or relative loss change without truth, is below."""

    retraction: Retraction = Retraction.STHOSVD

    baseline_stepsizes: Tuple[float, ...] = field(
        default_factory=lambda: (0.1, 0.25, 0.5, 0.75, 1.0)
    )
    """Stepsize grid for PGD and factored GD."""

    baseline_trial_iters: int = 20
    """Iterations each grid stepsize runs before the best one is kept."""

    ridge_eps: float = 1e-12
    """Relative ridge added to near-singular Gauss-Newton systems."""

    use_closed_form: bool = True
    """Use the closed-form Gauss-Newton update on tensor-on-vector designs."""

    def __post_init__(self):
        """Validate configuration after initialization."""
        self.algorithm = Algorithm(self.algorithm)
        self.retraction = Retraction(self.retraction)
        self.input_rank = tuple(int(r) for r in self.input_rank)
        self.baseline_stepsizes = tuple(float(a) for a in self.baseline_stepsizes)
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.tol_rel_rmse < 0:
            raise ValueError("tol_rel_rmse must be non-negative")
        if not self.input_rank or any(r < 1 for r in self.input_rank):
            raise ValueError("input_rank entries must be at least 1")
        if not self.baseline_stepsizes or any(a < 0 for a in self.baseline_stepsizes):
            raise ValueError("baseline_stepsizes must be non-empty and non-negative")
        if self.baseline_trial_iters < 1:
            raise ValueError("baseline_trial_iters must be at least 1")
        if self.ridge_eps < 0:
            raise ValueError("ridge_eps must be non-negative")
