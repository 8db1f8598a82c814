"""
Least-squares objective, Riemannian gradient and the gradient descent step.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from ..core.exceptions import InvalidArgumentError, NumericalFailureError
from ..core.tensor import DenseTensor, frob_norm
from ..manifold.gauge import Gauge, compute_gauge, project_tangent
from ..regression.design import adjoint, apply
from ..regression.instance import ProblemInstance
from ..tucker.decomposition import TuckerTensor, retract
from .config import SolverConfig

logger = logging.getLogger(__name__)

STATIONARY_TOL = 1e-15


def check_iterate_shape(instance: ProblemInstance, x_shape, operation: str) -> None:
    if tuple(x_shape) != instance.param_shape:
        raise InvalidArgumentError(
            f"iterate of shape {tuple(x_shape)} does not match parameter shape "
            f"{instance.param_shape}",
            operation=operation,
            field="x",
        )


def residual(instance: ProblemInstance, x: DenseTensor) -> DenseTensor:
    """``A(x) - Y``."""
    return apply(instance.design, x) - instance.observations


def loss(instance: ProblemInstance, x: DenseTensor) -> float:
    """``0.5 * ||Y - A(x)||_F^2``."""
    return 0.5 * float(np.sum(residual(instance, x) ** 2))


def euclidean_gradient(instance: ProblemInstance, x: DenseTensor) -> DenseTensor:
    """``A*(A(x) - Y)``."""
    return adjoint(instance.design, residual(instance, x))


def riemannian_gradient(
    instance: ProblemInstance, x: TuckerTensor, gauge: Optional[Gauge] = None
) -> DenseTensor:
    """``P_T(A*(A(x) - Y))`` at ``x``.

    Raises:
        DegeneratePointError: If no gauge is given and the one at ``x`` is
            degenerate.
    """
    check_iterate_shape(instance, x.shape, "riemannian_gradient")
    gauge = gauge if gauge is not None else compute_gauge(x)
    return project_tangent(gauge, euclidean_gradient(instance, x.dense()))


def exact_line_search_stepsize(instance: ProblemInstance, g: DenseTensor) -> float:
    """``||g||_F^2 / ||A(g)||_F^2``.

    Raises:
        NumericalFailureError: If the design annihilates a nonzero ``g``.
    """
    denom = float(np.sum(apply(instance.design, g) ** 2))
    numer = frob_norm(g) ** 2
    if denom == 0.0:
        raise NumericalFailureError(
            "design annihilates the gradient direction",
            operation="rgd_step",
        )
    return numer / denom


def rgd_step(
    instance: ProblemInstance,
    x: TuckerTensor,
    cfg: SolverConfig,
    gauge: Optional[Gauge] = None,
) -> Tuple[TuckerTensor, float]:
    """One Riemannian gradient step with the exact line-search stepsize.

    Returns ``(x, 0.0)`` unchanged when the gradient norm is below
    ``1e-15 * ||Y||_F``.
    """
    g = riemannian_gradient(instance, x, gauge)
    if frob_norm(g) <= STATIONARY_TOL * frob_norm(instance.observations):
        logger.debug("Gradient vanished; point is stationary")
        return x, 0.0
    alpha = exact_line_search_stepsize(instance, g)
    return retract(x.dense() - alpha * g, x.rank, cfg.retraction), alpha
