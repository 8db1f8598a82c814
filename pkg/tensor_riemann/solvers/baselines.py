"""
Baselines: projected gradient descent and gradient descent on Tucker factors.
"""

import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from ..core.tensor import DenseTensor, Matrix, matricize, multi_mode_product
from ..regression.instance import ProblemInstance
from ..tucker.decomposition import TuckerTensor, retract, sthosvd
from .config import Algorithm, SolverConfig
from .gradient import euclidean_gradient, loss

logger = logging.getLogger(__name__)

DIVERGENCE_FACTOR = 1e6


@dataclass(frozen=True)
class FactoredState:
    """Unconstrained Tucker factorization ``core x_k U_k`` (factors not orthonormal)."""

    core: DenseTensor
    factors: Tuple[Matrix, ...]

    @property
    def rank(self) -> Tuple[int, ...]:
        return tuple(self.core.shape)

    def dense(self) -> DenseTensor:
        return multi_mode_product(self.core, self.factors)

    @classmethod
    def from_tucker(cls, x: TuckerTensor) -> "FactoredState":
        return cls(x.core.copy(), tuple(u.copy() for u in x.factors))

    def to_tucker(self) -> TuckerTensor:
        return sthosvd(self.dense(), self.rank)


BaselineState = Union[TuckerTensor, FactoredState]


def pgd_step(
    instance: ProblemInstance, x: TuckerTensor, stepsize: float, cfg: SolverConfig
) -> TuckerTensor:
    """Ambient gradient step ``X - stepsize * A*(A(X) - Y)``, then retraction."""
    if stepsize == 0.0:
        return x
    dense = x.dense()
    z = dense - stepsize * euclidean_gradient(instance, dense)
    return retract(z, x.rank, cfg.retraction)


def factored_gd_step(
    instance: ProblemInstance, state: FactoredState, stepsize: float
) -> FactoredState:
    """Simultaneous gradient step on the core and every factor."""
    if stepsize == 0.0:
        return state
    grad = euclidean_gradient(instance, state.dense())
    core_grad = multi_mode_product(grad, state.factors, transpose=True)
    factors = []
    for k, u in enumerate(state.factors):
        reduced = multi_mode_product(grad, state.factors, transpose=True, skip=k)
        factor_grad = matricize(reduced, k) @ matricize(state.core, k).T
        factors.append(u - stepsize * factor_grad)
    return FactoredState(state.core - stepsize * core_grad, tuple(factors))


def baseline_step(
    instance: ProblemInstance,
    state: BaselineState,
    stepsize: float,
    cfg: SolverConfig,
) -> BaselineState:
    if cfg.algorithm is Algorithm.PGD:
        return pgd_step(instance, state, stepsize, cfg)
    return factored_gd_step(instance, state, stepsize)


def initial_baseline_state(x0: TuckerTensor, cfg: SolverConfig) -> BaselineState:
    if cfg.algorithm is Algorithm.FACTORED_GD:
        return FactoredState.from_tucker(x0)
    return x0


def has_diverged(current_loss: float, initial_loss: float) -> bool:
    """Loss is non-finite or above ``1e6`` times its starting value."""
    if not np.isfinite(current_loss):
        return True
    return current_loss > DIVERGENCE_FACTOR * max(initial_loss, np.finfo(float).tiny)


def select_baseline_stepsize(
    instance: ProblemInstance,
    x0: TuckerTensor,
    cfg: SolverConfig,
    trial_iters: int = None,
) -> float:
    """Pick the grid stepsize with the smallest loss after a short trial run.

    Divergent grid points are discarded; ties keep the earlier grid entry. If
    every grid point diverges the smallest stepsize is returned.
    """
    trial_iters = trial_iters or cfg.baseline_trial_iters
    start = initial_baseline_state(x0, cfg)
    initial_loss = loss(instance, start.dense())
    best, best_loss = None, np.inf
    for alpha in cfg.baseline_stepsizes:
        state = start
        current = initial_loss
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(trial_iters):
                state = baseline_step(instance, state, alpha, cfg)
                current = loss(instance, state.dense())
                if has_diverged(current, initial_loss):
                    break
        logger.debug(f"Stepsize {alpha}: loss {current:.6e} after trial run")
        if has_diverged(current, initial_loss):
            continue
        if current < best_loss:
            best, best_loss = alpha, current
    if best is None:
        best = min(cfg.baseline_stepsizes)
        logger.warning(f"Every grid stepsize diverged; falling back to {best}")
    return best
