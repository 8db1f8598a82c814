"""
Spectral initializations built from the adjoint of the observations.
"""

import logging
from typing import Sequence, Union

import numpy as np
import scipy.linalg

from ..core.exceptions import DegenerateDesignError, InvalidArgumentError
from ..core.tensor import matricize, mode_product
from ..regression.design import DesignKind, adjoint, vector_design_matrix
from ..regression.instance import ProblemInstance
from ..tucker.decomposition import (
    TuckerTensor,
    matrix_svd_projection,
    ohooi,
    thosvd,
    validate_rank,
)
from ..tucker.linalg import leading_left_singular_vectors, qr_positive

logger = logging.getLogger(__name__)

RANK_DEFICIENCY_TOL = 1e-12

RankLike = Union[int, Sequence[int]]


def _as_rank(instance: ProblemInstance, rank: RankLike, operation: str) -> tuple:
    shape = instance.param_shape
    if isinstance(rank, (int, np.integer)):
        rank = (int(rank),) * len(shape)
    return validate_rank(shape, rank, operation)


def _one_sweep_hooi(t: np.ndarray, rank: tuple, inplace: bool) -> TuckerTensor:
    init = [leading_left_singular_vectors(matricize(t, k), r) for k, r in enumerate(rank)]
    return ohooi(t, init, rank, inplace=inplace)


def init_scalar_on_tensor(
    instance: ProblemInstance, rank: RankLike, hooi_inplace: bool = False
) -> TuckerTensor:
    """One HOOI sweep on ``A*(y)`` started from its per-mode leading subspaces.

    Args:
        instance: A scalar-response instance (``m = 0``).
        rank: Input Tucker rank.
        hooi_inplace: Use factors already updated in the sweep for earlier
            modes; by default every mode projects with the starting factors.

    Raises:
        InvalidArgumentError: If the responses are not scalar.
    """
    if instance.design.m != 0:
        raise InvalidArgumentError(
            f"scalar-on-tensor initialization needs m = 0, got m={instance.design.m}",
            operation="init_scalar_on_tensor",
            field="instance",
        )
    rank = _as_rank(instance, rank, "init_scalar_on_tensor")
    t = adjoint(instance.design, instance.observations)
    return _one_sweep_hooi(t, rank, hooi_inplace)


def init_tensor_on_vector(
    instance: ProblemInstance, rank: RankLike, hooi_inplace: bool = False
) -> TuckerTensor:
    """Initialization for ``Y = X x_0 A + E`` through the QR of ``A``.

    Works on ``Y x_0 Q^T = X x_0 R + noise`` and maps back with a triangular
    solve against ``R``.

    Raises:
        InvalidArgumentError: If the design is not a vector design.
        DegenerateDesignError: If ``A`` does not have full column rank.
    """
    design = instance.design
    if design.kind is not DesignKind.VECTOR:
        raise InvalidArgumentError(
            f"expected a vector design, got {design.kind.value}",
            operation="init_tensor_on_vector",
            field="instance",
        )
    rank = _as_rank(instance, rank, "init_tensor_on_vector")
    a = vector_design_matrix(design)
    n, p = a.shape
    if n < p:
        raise DegenerateDesignError(
            f"design has n={n} rows for p_1={p} columns",
            operation="init_tensor_on_vector",
        )
    q, r = qr_positive(a)
    diag = np.abs(np.diag(r))
    if diag.min() <= RANK_DEFICIENCY_TOL * diag.max():
        raise DegenerateDesignError(
            "design matrix is rank deficient", operation="init_tensor_on_vector"
        )
    transformed = mode_product(instance.observations, q.T, 0)
    approx = _one_sweep_hooi(transformed, rank, hooi_inplace)

    # X = Xbar x_0 R^{-1}; re-orthonormalize the mode-0 factor.
    lifted = scipy.linalg.solve_triangular(r, approx.factors[0], lower=False)
    u0, t0 = qr_positive(lifted)
    core = mode_product(approx.core, t0, 0)
    return TuckerTensor(core, (u0,) + approx.factors[1:])


def init_matrix_trace(instance: ProblemInstance, rank: RankLike) -> TuckerTensor:
    """Rank-``r`` truncated SVD of ``A*(y)`` for matrix trace regression."""
    design = instance.design
    if design.d != 2 or design.m != 0:
        raise InvalidArgumentError(
            f"matrix trace initialization needs d = 2, m = 0, got d={design.d}, "
            f"m={design.m}",
            operation="init_matrix_trace",
            field="instance",
        )
    rank = _as_rank(instance, rank, "init_matrix_trace")
    if rank[0] != rank[1]:
        raise InvalidArgumentError(
            f"matrix rank must be equal on both modes, got {rank}",
            operation="init_matrix_trace",
            field="rank",
        )
    return matrix_svd_projection(adjoint(design, instance.observations), rank[0])


def spectral_initialization(
    instance: ProblemInstance, rank: RankLike, hooi_inplace: bool = False
) -> TuckerTensor:
    """Pick the initialization that matches the design.

    General designs with tensor responses have no dedicated scheme; they use
    the T-HOSVD of ``A*(Y)``.
    """
    design = instance.design
    if design.kind is DesignKind.VECTOR:
        return init_tensor_on_vector(instance, rank, hooi_inplace)
    rank = _as_rank(instance, rank, "spectral_initialization")
    if design.kind is DesignKind.MATRIX_TRACE and rank[0] == rank[1]:
        return init_matrix_trace(instance, rank)
    if design.m == 0:
        return init_scalar_on_tensor(instance, rank, hooi_inplace)
    logger.warning(
        f"No spectral initialization for d={design.d}, m={design.m}; "
        f"using T-HOSVD of the adjoint"
    )
    return thosvd(adjoint(design, instance.observations), rank)
