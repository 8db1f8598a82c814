"""
Riemannian Gauss-Newton updates.

The tangent-space least squares ``min ||Y - A P_T(X)||_F`` is solved in the
``(B, {D_k})`` parameterization. Projecting the response modes of ``Y`` onto
``U_k`` and ``U_{k,perp}`` splits it into one joint system for ``B`` and the
covariate-mode blocks plus one independent system per response mode.
"""

import logging
from typing import List, Optional

import numpy as np
import scipy.linalg

from ..core.exceptions import DegenerateDesignError, NumericalFailureError
from ..core.tensor import Matrix, matricize, mode_product, multi_mode_product, tensorize
from ..manifold.gauge import Gauge, compute_gauge
from ..manifold.tangent import TangentVector, tangent_to_dense
from ..regression.design import DesignKind, adjoint, vector_design_matrix
from ..regression.instance import ProblemInstance
from ..tucker.decomposition import TuckerTensor, retract
from .config import SolverConfig
from .gradient import check_iterate_shape

logger = logging.getLogger(__name__)

GRAM_CONDITION_TOL = 1e-12


def least_squares(matrix: Matrix, rhs: np.ndarray, ridge_eps: float) -> np.ndarray:
    """Minimize ``||matrix @ x - rhs||`` through an economic QR.

    When ``matrix`` has fewer rows than columns, or its smallest singular value
    is at most ``ridge_eps`` times the largest, the rows ``sqrt(ridge_eps) * I``
    are appended first. The result then solves
    ``(matrix^T matrix + ridge_eps * I) x = matrix^T rhs``.

    Raises:
        NumericalFailureError: On non-finite input, or a rank-deficient system
            with ``ridge_eps == 0``.
    """
    if not (np.all(np.isfinite(matrix)) and np.all(np.isfinite(rhs))):
        raise NumericalFailureError(
            "least-squares system has non-finite entries", operation="least_squares"
        )
    rows, cols = matrix.shape
    if cols == 0 or rhs.size == 0:
        return np.zeros((cols,) + rhs.shape[1:])
    s = scipy.linalg.svdvals(matrix)
    top = s[0] if s.size and s[0] > 0 else 1.0
    deficient = rows < cols or s[-1] <= ridge_eps * top
    if deficient:
        if ridge_eps <= 0:
            raise NumericalFailureError(
                f"rank-deficient {rows}x{cols} system without ridge",
                operation="least_squares",
            )
        logger.debug(f"Adding ridge to ill-conditioned {rows}x{cols} system")
        matrix = np.vstack([matrix, np.sqrt(ridge_eps) * np.eye(cols)])
        rhs = np.concatenate([rhs, np.zeros((cols,) + rhs.shape[1:])])
    q, r = scipy.linalg.qr(matrix, mode="economic")
    try:
        return scipy.linalg.solve_triangular(r, q.T @ rhs, lower=False)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalFailureError(
            f"triangular solve failed: {e}", operation="least_squares", cause=e
        ) from e


def _covariate_block(
    cov: np.ndarray, s: np.ndarray, g: Gauge, k: int, d: int
) -> Matrix:
    # Columns for D_k on a covariate mode, rows ordered (i, j_resp) column-major.
    n = cov.shape[0]
    reduced = multi_mode_product(
        cov, g.factors[:d], modes=range(1, d + 1), transpose=True, skip=k + 1
    )
    reduced = mode_product(reduced, g.u_perp[k].T, k + 1)
    others = [j for j in range(d) if j != k]
    block = np.tensordot(reduced, s, axes=([j + 1 for j in others], others))
    block = np.moveaxis(block, [1, 2], [-2, -1])
    rows = n * int(np.prod(block.shape[1:-2]))
    cols = (g.shape[k] - g.rank[k]) * g.rank[k]
    return np.reshape(block, (rows, cols), order="F")


def rgn_tangent_update(
    instance: ProblemInstance, g: Gauge, ridge_eps: float = 1e-12
) -> TangentVector:
    """Solve the Gauss-Newton least squares on the tangent space at ``g``.

    Returns the minimizer ``X^{t+0.5}`` in ``(B, {D_k})`` form; the ambient
    projector is never formed.
    """
    design = instance.design
    d, m, n = design.d, design.m, design.n
    rank = g.rank
    s = g.core
    cov = design.scale * design.covariates
    y = instance.observations

    # Covariates reduced onto U_j, shape (n, r_0, ..., r_{d-1}).
    reduced = multi_mode_product(cov, g.factors[:d], modes=range(1, d + 1), transpose=True)
    # Observations reduced onto the response factors, shape (n, r_d, ...).
    y_core = multi_mode_product(y, g.factors[d:], modes=range(1, m + 1), transpose=True)
    size_cov = int(np.prod(rank[:d]))
    size_resp = int(np.prod(rank[d:])) if m else 1

    columns = [np.kron(np.eye(size_resp), np.reshape(reduced, (n, size_cov), order="F"))]
    for k in range(d):
        columns.append(_covariate_block(cov, s, g, k, d))
    system = np.hstack(columns)
    rhs = np.reshape(y_core, (n * size_resp,), order="F")
    theta = least_squares(system, rhs, ridge_eps)

    size_b = int(np.prod(rank))
    b = np.reshape(theta[:size_b], rank, order="F")
    blocks: List[Optional[Matrix]] = [None] * g.order
    offset = size_b
    for k in range(d):
        size = (g.shape[k] - rank[k]) * rank[k]
        blocks[k] = np.reshape(
            theta[offset : offset + size], (g.shape[k] - rank[k], rank[k]), order="F"
        )
        offset += size

    # Response modes decouple: one multivariate system per mode.
    mixed = np.tensordot(reduced, s, axes=(list(range(1, d + 1)), list(range(d))))
    for k in range(d, d + m):
        axis = 1 + k - d
        target = multi_mode_product(
            y, g.factors[d:], modes=range(1, m + 1), transpose=True, skip=axis
        )
        target = mode_product(target, g.u_perp[k].T, axis)
        solution = least_squares(
            matricize(mixed, axis).T, matricize(target, axis).T, ridge_eps
        )
        blocks[k] = solution.T
    return TangentVector(gauge=g, b=b, d=tuple(blocks))


def rgn_step(
    instance: ProblemInstance,
    x: TuckerTensor,
    cfg: SolverConfig,
    gauge: Optional[Gauge] = None,
) -> TuckerTensor:
    """One Riemannian Gauss-Newton step: tangent least squares, then retraction.

    Raises:
        DegeneratePointError: If no gauge is given and the one at ``x`` is
            degenerate.
        NumericalFailureError: If a least-squares solve fails.
    """
    check_iterate_shape(instance, x.shape, "rgn_step")
    gauge = gauge if gauge is not None else compute_gauge(x)
    update = rgn_tangent_update(instance, gauge, cfg.ridge_eps)
    return retract(tangent_to_dense(update), x.rank, cfg.retraction)


def _check_vector_gram(a: Matrix) -> np.ndarray:
    n, p = a.shape
    if n < p:
        raise DegenerateDesignError(
            f"closed form needs n >= p_1, got n={n} < {p}",
            operation="rgn_step_vector_closed_form",
        )
    gram = a.T @ a
    eig = scipy.linalg.eigvalsh(gram)
    if eig[-1] <= 0 or eig[0] <= GRAM_CONDITION_TOL * eig[-1]:
        raise DegenerateDesignError(
            "A^T A is singular to working precision",
            operation="rgn_step_vector_closed_form",
        )
    return gram


def closed_form_vector_update(instance: ProblemInstance, g: Gauge) -> TangentVector:
    """Gauss-Newton minimizer for a tensor-on-vector design in closed form.

    Raises:
        DegenerateDesignError: If ``A^T A`` is singular or ``n < p_1``.
        DegeneratePointError: If the gauge is padded.
    """
    g.require_unpadded("closed_form_vector_update")
    design = instance.design
    a = vector_design_matrix(design)
    gram = _check_vector_gram(a)
    chol = scipy.linalg.cho_factor(gram)
    rank = g.rank
    u0, u0_perp = g.factors[0], g.u_perp[0]
    y = instance.observations

    y_red = matricize(multi_mode_product(y, g.factors, transpose=True, skip=0), 0)
    aty = a.T @ y_red
    q = scipy.linalg.cho_solve(chol, aty) @ g.v[0]
    e = u0_perp.T @ q
    blocks = [scipy.linalg.solve_triangular(g.r_tri[0], e.T, lower=False).T]

    core_gram = u0.T @ gram @ u0
    rhs = u0.T @ (aty - gram @ u0_perp @ e @ g.v[0].T)
    b = tensorize(scipy.linalg.solve(core_gram, rhs, assume_a="pos"), 0, rank)

    z = adjoint(design, y)
    for k in range(1, g.order):
        weighted = mode_product(tensorize(g.v[k].T, k, rank), core_gram, 0)
        h = matricize(weighted, k) @ g.v[k]
        lhs = g.u_perp[k].T @ g.row_space_product(z, k)
        scaled = scipy.linalg.solve(h, lhs.T, assume_a="pos").T
        blocks.append(
            scipy.linalg.solve_triangular(g.r_tri[k], scaled.T, lower=False).T
        )
    return TangentVector(gauge=g, b=b, d=tuple(blocks))


def rgn_step_vector_closed_form(
    instance: ProblemInstance,
    x: TuckerTensor,
    cfg: SolverConfig,
    gauge: Optional[Gauge] = None,
) -> TuckerTensor:
    """Gauss-Newton step for tensor-on-vector designs without a least-squares solve.

    Raises:
        DegenerateDesignError: If the design is not ``VECTOR`` kind or its Gram
            matrix is singular.
    """
    if instance.design.kind is not DesignKind.VECTOR:
        raise DegenerateDesignError(
            f"closed form applies to vector designs, got {instance.design.kind.value}",
            operation="rgn_step_vector_closed_form",
        )
    check_iterate_shape(instance, x.shape, "rgn_step_vector_closed_form")
    gauge = gauge if gauge is not None else compute_gauge(x)
    update = closed_form_vector_update(instance, gauge)
    return retract(tangent_to_dense(update), x.rank, cfg.retraction)
