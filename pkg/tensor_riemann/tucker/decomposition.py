"""
Tucker tensors and low-Tucker-rank approximation.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..core.exceptions import InvalidArgumentError
from ..core.tensor import DenseTensor, Matrix, matricize, multi_mode_product
from .config import HooiConfig, Retraction
from .linalg import (
    leading_left_singular_vectors,
    orthonormality_error,
    random_orthonormal,
    truncated_svd,
)

logger = logging.getLogger(__name__)

ORTHONORMAL_INPUT_TOL = 1e-8


@dataclass(frozen=True)
class TuckerTensor:
    """A tensor ``core x_0 U_0 x_1 ... x_{D-1} U_{D-1}``.

    Attributes:
        core: Core tensor of shape ``(r_0, ..., r_{D-1})``.
        factors: Column-orthonormal factors ``U_k`` of shape ``(p_k, r_k)``.
    """

    core: DenseTensor
    factors: Tuple[Matrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if len(self.factors) != self.core.ndim:
            raise InvalidArgumentError(
                f"{len(self.factors)} factors for an order-{self.core.ndim} core",
                operation="TuckerTensor",
                field="factors",
            )
        for k, u in enumerate(self.factors):
            if u.ndim != 2 or u.shape[1] != self.core.shape[k] or u.shape[1] > u.shape[0]:
                raise InvalidArgumentError(
                    f"factor {k} of shape {u.shape} does not fit core extent "
                    f"{self.core.shape[k]}",
                    operation="TuckerTensor",
                    field="factors",
                )

    @property
    def order(self) -> int:
        return self.core.ndim

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(u.shape[0] for u in self.factors)

    @property
    def rank(self) -> Tuple[int, ...]:
        return tuple(self.core.shape)

    def dense(self) -> DenseTensor:
        return multi_mode_product(self.core, self.factors)

    def frob_norm(self) -> float:
        # Factors are orthonormal, so the norm lives on the core.
        return float(np.linalg.norm(self.core))

    def orthonormality_error(self) -> float:
        return max(orthonormality_error(u) for u in self.factors)

    @classmethod
    def from_dense(cls, t: DenseTensor, rank: Sequence[int]) -> "TuckerTensor":
        return sthosvd(t, rank)


def validate_rank(shape: Sequence[int], rank: Sequence[int], operation: str) -> tuple:
    rank = tuple(int(r) for r in rank)
    if len(rank) != len(shape):
        raise InvalidArgumentError(
            f"rank {rank} has {len(rank)} entries for an order-{len(shape)} tensor",
            operation=operation,
            field="rank",
        )
    for k, (r, p) in enumerate(zip(rank, shape)):
        if not 1 <= r <= p:
            raise InvalidArgumentError(
                f"rank {r} on mode {k} outside [1, {p}]", operation=operation, field="rank"
            )
    return rank


def project_onto_factors(t: DenseTensor, factors: Sequence[Matrix]) -> TuckerTensor:
    """Tucker form of ``t x_k P_{U_k}``: core ``t x_k U_k^T`` with the given factors."""
    return TuckerTensor(multi_mode_product(t, factors, transpose=True), tuple(factors))


def thosvd(t: DenseTensor, rank: Sequence[int]) -> TuckerTensor:
    """Truncated HOSVD: independent per-mode truncated SVDs of the unfoldings."""
    rank = validate_rank(t.shape, rank, "thosvd")
    factors = [leading_left_singular_vectors(matricize(t, k), r) for k, r in enumerate(rank)]
    return project_onto_factors(t, factors)


def sthosvd(t: DenseTensor, rank: Sequence[int]) -> TuckerTensor:
    """Sequentially truncated HOSVD, truncating mode 0 first."""
    rank = validate_rank(t.shape, rank, "sthosvd")
    core = t
    factors = []
    for k, r in enumerate(rank):
        u = leading_left_singular_vectors(matricize(core, k), r)
        factors.append(u)
        core = multi_mode_product(core, [u.T], modes=[k])
    return TuckerTensor(core, tuple(factors))


def _check_init_factors(
    t: DenseTensor, factors: Sequence[Matrix], rank: tuple, operation: str
) -> None:
    if len(factors) != t.ndim:
        raise InvalidArgumentError(
            f"{len(factors)} initial factors for an order-{t.ndim} tensor",
            operation=operation,
            field="init_factors",
        )
    for k, u in enumerate(factors):
        if u.shape != (t.shape[k], rank[k]):
            raise InvalidArgumentError(
                f"initial factor {k} has shape {u.shape}, expected "
                f"{(t.shape[k], rank[k])}",
                operation=operation,
                field="init_factors",
            )
        if orthonormality_error(u) > ORTHONORMAL_INPUT_TOL:
            raise InvalidArgumentError(
                f"initial factor {k} is not column-orthonormal",
                operation=operation,
                field="init_factors",
            )


def _hooi_sweep(
    t: DenseTensor, factors: List[Matrix], rank: tuple, inplace: bool
) -> List[Matrix]:
    previous = list(factors)
    current = list(factors)
    for k in range(t.ndim):
        others = current if inplace else previous
        reduced = multi_mode_product(t, others, transpose=True, skip=k)
        current[k] = leading_left_singular_vectors(matricize(reduced, k), rank[k])
    return current


def ohooi(
    t: DenseTensor,
    init_factors: Sequence[Matrix],
    rank: Sequence[int],
    inplace: bool = True,
) -> TuckerTensor:
    """One sweep of higher-order orthogonal iteration.

    Args:
        t: Tensor to approximate.
        init_factors: Column-orthonormal starting factors ``(p_k, r_k)``.
        rank: Target Tucker rank.
        inplace: Project modes ``j < k`` with the factors already updated in
            this sweep; otherwise every mode uses the starting factors.

    Returns:
        ``t x_k P_{U_k}`` in Tucker form.
    """
    rank = validate_rank(t.shape, rank, "ohooi")
    _check_init_factors(t, init_factors, rank, "ohooi")
    factors = _hooi_sweep(t, list(init_factors), rank, inplace)
    return project_onto_factors(t, factors)


def hooi(
    t: DenseTensor,
    init_factors: Sequence[Matrix],
    rank: Sequence[int],
    max_sweeps: int = 100,
    tol: float = 1e-12,
) -> Tuple[TuckerTensor, List[float]]:
    """Alternating HOOI sweeps until the objective ``||t x_k U_k^T||_F`` stalls.

    Returns:
        The final Tucker approximation and the objective after each sweep.
    """
    rank = validate_rank(t.shape, rank, "hooi")
    _check_init_factors(t, init_factors, rank, "hooi")
    scale = max(float(np.linalg.norm(t)), 1.0)
    factors = list(init_factors)
    objectives = [float(np.linalg.norm(multi_mode_product(t, factors, transpose=True)))]
    for _ in range(max_sweeps):
        factors = _hooi_sweep(t, factors, rank, inplace=True)
        objectives.append(
            float(np.linalg.norm(multi_mode_product(t, factors, transpose=True)))
        )
        if abs(objectives[-1] - objectives[-2]) < tol * scale:
            break
    return project_onto_factors(t, factors), objectives


def hooi_best_approx(
    t: DenseTensor, rank: Sequence[int], config: Optional[HooiConfig] = None
) -> TuckerTensor:
    """Surrogate for the best Tucker-rank approximation.

    Runs :func:`hooi` from the T-HOSVD factors and from ``restarts - 1``
    random orthonormal factor sets, keeping the largest objective (earliest
    restart on ties).
    """
    config = config or HooiConfig()
    rank = validate_rank(t.shape, rank, "hooi_best_approx")
    rng = np.random.default_rng(config.seed)
    best, best_obj = None, -np.inf
    for restart in range(config.restarts):
        if restart == 0:
            init = list(thosvd(t, rank).factors)
        else:
            init = [random_orthonormal(rng, p, r) for p, r in zip(t.shape, rank)]
        approx, objectives = hooi(t, init, rank, config.max_sweeps, config.tol)
        logger.debug(
            f"HOOI restart {restart}: objective {objectives[-1]:.6e} after "
            f"{len(objectives) - 1} sweeps"
        )
        if objectives[-1] > best_obj:
            best, best_obj = approx, objectives[-1]
    return best


def matrix_svd_projection(z: Matrix, r: int) -> TuckerTensor:
    """Best rank-``r`` matrix approximation as an order-2 Tucker tensor."""
    svd = truncated_svd(z, r)
    return TuckerTensor(np.diag(svd.s), (svd.u, svd.v))


def retract(
    z: DenseTensor, rank: Sequence[int], method: Retraction = Retraction.STHOSVD
) -> TuckerTensor:
    """Retraction ``H_r`` onto Tucker rank at most ``rank``."""
    method = Retraction(method)
    if method is Retraction.MATRIX_SVD:
        if z.ndim != 2:
            raise InvalidArgumentError(
                f"matrix SVD retraction needs an order-2 tensor, got order {z.ndim}",
                operation="retract",
                field="method",
            )
        rank = validate_rank(z.shape, rank, "retract")
        if rank[0] != rank[1]:
            raise InvalidArgumentError(
                f"matrix rank must be equal on both modes, got {rank}",
                operation="retract",
                field="rank",
            )
        return matrix_svd_projection(z, rank[0])
    if method is Retraction.THOSVD:
        return thosvd(z, rank)
    return sthosvd(z, rank)
