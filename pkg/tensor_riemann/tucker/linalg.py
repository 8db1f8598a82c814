"""
Deterministic matrix factorizations used by the Tucker and manifold layers.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..core.exceptions import InvalidArgumentError, NumericalFailureError
from ..core.tensor import Matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TruncatedSVD:
    """Leading singular triplets ``m ~ u @ diag(s) @ v.T``.

    Attributes:
        u: Left singular vectors, column-orthonormal.
        s: Singular values, nonincreasing and nonnegative.
        v: Right singular vectors, column-orthonormal.
    """

    u: Matrix
    s: np.ndarray
    v: Matrix

    @property
    def rank(self) -> int:
        return int(self.s.shape[0])

    def reconstruct(self) -> Matrix:
        return (self.u * self.s) @ self.v.T


def _svd(m: Matrix, full_matrices: bool, operation: str):
    if not np.all(np.isfinite(m)):
        raise NumericalFailureError("matrix has non-finite entries", operation=operation)
    try:
        return scipy.linalg.svd(
            m, full_matrices=full_matrices, lapack_driver="gesdd", check_finite=False
        )
    except np.linalg.LinAlgError as e:
        logger.warning(f"gesdd failed on {m.shape} matrix, retrying with gesvd: {e}")
        try:
            return scipy.linalg.svd(
                m, full_matrices=full_matrices, lapack_driver="gesvd", check_finite=False
            )
        except np.linalg.LinAlgError as e2:
            raise NumericalFailureError(
                f"SVD did not converge: {e2}", operation=operation, cause=e2
            ) from e2


def _sign_fix(u: Matrix, vh: np.ndarray = None):
    """Flip columns of ``u`` so the largest-magnitude entry is positive.

    ``np.argmax`` returns the lowest index among ties.
    """
    if u.shape[1] == 0:
        return u, vh
    pivots = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[pivots, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    u = u * signs
    if vh is not None:
        vh = vh * signs[: vh.shape[0], None]
    return u, vh


def truncated_svd(m: Matrix, r: int) -> TruncatedSVD:
    """Top-``r`` singular triplets with the deterministic sign convention.

    Raises:
        InvalidArgumentError: If ``r`` is not in ``[1, min(m.shape)]``.
        NumericalFailureError: If the SVD fails to converge.
    """
    if m.ndim != 2:
        raise InvalidArgumentError(
            f"expected a matrix, got shape {m.shape}", operation="truncated_svd", field="m"
        )
    if not 1 <= r <= min(m.shape):
        raise InvalidArgumentError(
            f"rank {r} outside [1, {min(m.shape)}]", operation="truncated_svd", field="r"
        )
    u, s, vh = _svd(m, full_matrices=False, operation="truncated_svd")
    u, vh = _sign_fix(u[:, :r], vh[:r])
    return TruncatedSVD(u=u, s=s[:r].copy(), v=vh.T.copy())


def leading_left_singular_vectors(m: Matrix, r: int) -> Matrix:
    """``SVD_r(m)``: the leading ``r`` left singular vectors of ``m``.

    When ``r`` exceeds the number of columns, or the rank of ``m``, the result
    is padded with the remaining columns of the full left factor, which
    complete the basis deterministically.
    """
    rows, cols = m.shape
    if not 1 <= r <= rows:
        raise InvalidArgumentError(
            f"rank {r} outside [1, {rows}]",
            operation="leading_left_singular_vectors",
            field="r",
        )
    full = r > min(rows, cols)
    u, _, _ = _svd(m, full_matrices=full, operation="leading_left_singular_vectors")
    u, _ = _sign_fix(u[:, :r])
    return u


def qr_positive(a: Matrix) -> tuple:
    """Economic QR with a nonnegative diagonal in the triangular factor."""
    q, r = scipy.linalg.qr(a, mode="economic")
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs, r * signs[:, None]


def orthonormal_complement(u: Matrix) -> Matrix:
    """Columns completing ``u`` to a square orthogonal matrix.

    Computed from the full QR of ``u`` with the same sign convention as
    :func:`qr_positive`, so the completion is deterministic.
    """
    p, r = u.shape
    q, rr = scipy.linalg.qr(u, mode="full")
    signs = np.ones(p)
    diag = np.sign(np.diag(rr))
    diag[diag == 0] = 1.0
    signs[: diag.shape[0]] = diag
    q = q * signs
    return q[:, r:].copy()


def random_orthonormal(rng: np.random.Generator, p: int, r: int) -> Matrix:
    """Haar-distributed ``p x r`` column-orthonormal matrix (QR of a Gaussian)."""
    q, _ = qr_positive(rng.standard_normal((p, r)))
    return q


def orthonormality_error(u: Matrix) -> float:
    """``||u^T u - I||_F``."""
    return float(np.linalg.norm(u.T @ u - np.eye(u.shape[1])))
