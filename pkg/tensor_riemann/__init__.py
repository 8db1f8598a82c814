"""
tensor_riemann - Riemannian Gauss-Newton and gradient descent for low-Tucker-rank
tensor-on-tensor regression, with spectral initializations and experiment tooling.
"""

__version__ = "0.1.0"
__author__ = "tensor_riemann developers"

from .config import Config
from .regression import ProblemInstance, generate_gaussian_instance
from .solvers import Algorithm, SolverConfig, solve
from .tucker import TuckerTensor

__all__ = [
    "Config",
    "ProblemInstance",
    "generate_gaussian_instance",
    "Algorithm",
    "SolverConfig",
    "solve",
    "TuckerTensor",
    "__version__",
]
