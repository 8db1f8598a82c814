"""
Gauge quantities of the fixed-Tucker-rank manifold and its tangent projector.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..core.exceptions import DegeneratePointError, InvalidArgumentError
from ..core.tensor import (
    DenseTensor,
    Matrix,
    matricize,
    mode_product,
    multi_mode_product,
    tensorize,
)
from ..tucker.decomposition import TuckerTensor
from ..tucker.linalg import orthonormal_complement, qr_positive, truncated_svd

logger = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class Gauge:
    """Gauge of a base point ``X = [[S; U_0, ..., U_{D-1}]]``.

    Attributes:
        base: The base point.
        v: ``V_k``, orthonormal basis of the row space of ``M_k(S)`` from the QR
            of ``M_k(S)^T``.
        r_tri: Square factors with ``M_k(S)^T = V_k R_k``. Upper triangular with a
            positive diagonal from the QR of ``M_k(S)^T``, except on padded modes.
        w: ``W_k = (kron_{j != k} U_j) V_k``, the row space of ``M_k(X)``.
        u_perp: Orthonormal complements ``U_{k,perp}``.
        padded_modes: Modes whose ``V_k`` was completed past the numerical rank
            of ``M_k(S)``. There ``r_tri`` is ``V_k^T M_k(S)^T``, which is singular
            and not triangular.
    """

    base: TuckerTensor
    v: Tuple[Matrix, ...]
    r_tri: Tuple[Matrix, ...]
    w: Tuple[Matrix, ...]
    u_perp: Tuple[Matrix, ...]
    padded_modes: Tuple[int, ...] = ()

    @property
    def is_padded(self) -> bool:
        return bool(self.padded_modes)

    def require_unpadded(self, operation: str) -> None:
        """Raise ``DegeneratePointError`` if some ``R_k`` is not triangular."""
        if self.padded_modes:
            raise DegeneratePointError(
                f"operation needs invertible R_k, but modes {list(self.padded_modes)} "
                f"are padded",
                operation=operation,
                mode=self.padded_modes[0],
            )

    @property
    def factors(self) -> Tuple[Matrix, ...]:
        return self.base.factors

    @property
    def core(self) -> DenseTensor:
        return self.base.core

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.base.shape

    @property
    def rank(self) -> Tuple[int, ...]:
        return self.base.rank

    @property
    def order(self) -> int:
        return self.base.order

    def mixed_shape(self, k: int) -> Tuple[int, ...]:
        """Core shape with mode ``k`` widened to the ambient extent ``p_k``."""
        shape = list(self.rank)
        shape[k] = self.shape[k]
        return tuple(shape)

    def row_space_product(self, z: DenseTensor, k: int) -> Matrix:
        """``M_k(z) W_k``, evaluated as ``M_k(z x_{j!=k} U_j^T) V_k``."""
        reduced = multi_mode_product(z, self.factors, transpose=True, skip=k)
        return matricize(reduced, k) @ self.v[k]

    def lift_row_space(self, e: Matrix, k: int) -> DenseTensor:
        """``T_k(e W_k^T)`` for ``e`` of shape ``(p_k, r_k)``."""
        folded = tensorize(e @ self.v[k].T, k, self.mixed_shape(k))
        return multi_mode_product(folded, self.factors, skip=k)


def _assemble_w(core: DenseTensor, factors, v_k: Matrix, k: int) -> Matrix:
    folded = tensorize(v_k.T, k, core.shape)
    return matricize(multi_mode_product(folded, factors, skip=k), k).T


def _padded_row_basis(mk: Matrix, s: np.ndarray) -> Matrix:
    # Leading right singular vectors above the tolerance, then the complement.
    q = int(np.count_nonzero(s > DEGENERACY_TOL * s[0]))
    lead = truncated_svd(mk, q).v
    extra = orthonormal_complement(lead)[:, : mk.shape[0] - q]
    return np.hstack([lead, extra])


def compute_gauge(x: TuckerTensor, pad: bool = False) -> Gauge:
    """Gauge quantities at ``x``.

    Args:
        x: Base point.
        pad: Complete ``V_k`` deterministically on modes where ``M_k(S)`` is
            rank deficient instead of failing.

    Raises:
        DegeneratePointError: If some ``M_k(S)`` has numerical rank below
            ``r_k`` (smallest singular value under ``1e-12`` of the largest)
            and padding is off, or the unfolding cannot be padded (zero core,
            or ``r_k`` above the product of the other ranks).
    """
    core = x.core
    v, r_tri, w, u_perp, padded = [], [], [], [], []
    for k in range(x.order):
        mk = matricize(core, k)
        s = np.linalg.svd(mk, compute_uv=False)
        wide = mk.shape[0] > mk.shape[1]
        if wide or s[0] == 0.0 or s[-1] < DEGENERACY_TOL * s[0]:
            if not pad or wide or s[0] == 0.0:
                raise DegeneratePointError(
                    f"core unfolding is rank deficient below r_k={mk.shape[0]}",
                    operation="compute_gauge",
                    mode=k,
                )
            v_k = _padded_row_basis(mk, s)
            r_k = v_k.T @ mk.T
            padded.append(k)
        else:
            v_k, r_k = qr_positive(mk.T)
        v.append(v_k)
        r_tri.append(r_k)
        w.append(_assemble_w(core, x.factors, v_k, k))
        u_perp.append(orthonormal_complement(x.factors[k]))
    if padded:
        logger.info(f"Padded row-space bases on degenerate modes {padded}")
    return Gauge(
        base=x,
        v=tuple(v),
        r_tri=tuple(r_tri),
        w=tuple(w),
        u_perp=tuple(u_perp),
        padded_modes=tuple(padded),
    )


def _check_ambient(g: Gauge, z: DenseTensor, operation: str) -> None:
    if z.shape != g.shape:
        raise InvalidArgumentError(
            f"tensor of shape {z.shape} does not live at a point of shape {g.shape}",
            operation=operation,
            field="z",
        )


def _project_matrix(g: Gauge, z: Matrix) -> Matrix:
    u, v = g.factors
    zu = u @ (u.T @ z)
    zv = (z @ v) @ v.T
    return zu + zv - u @ (u.T @ zv)


def project_tangent(g: Gauge, z: DenseTensor) -> DenseTensor:
    """Orthogonal projection of ``z`` onto the tangent space at the base point."""
    _check_ambient(g, z, "project_tangent")
    if g.order == 2:
        return _project_matrix(g, z)
    out = multi_mode_product(
        multi_mode_product(z, g.factors, transpose=True), g.factors
    )
    for k in range(g.order):
        u = g.factors[k]
        y = g.row_space_product(z, k)
        e = y - u @ (u.T @ y)
        out = out + g.lift_row_space(e, k)
    return out


def project_tangent_complement(g: Gauge, z: DenseTensor) -> DenseTensor:
    """``z - P_T(z)``."""
    return z - project_tangent(g, z)


def project_tangent_general(g: Gauge, z: DenseTensor) -> DenseTensor:
    """Tangent projection by the mode-wise formula, without the matrix shortcut."""
    _check_ambient(g, z, "project_tangent")
    out = multi_mode_product(
        multi_mode_product(z, g.factors, transpose=True), g.factors
    )
    for k in range(g.order):
        u = g.factors[k]
        y = matricize(z, k) @ g.w[k]
        e = y - u @ (u.T @ y)
        out = out + tensorize(e @ g.w[k].T, k, g.shape)
    return out


def core_perturbation(g: Gauge, k: int, block: Matrix) -> DenseTensor:
    """``S x_k block x_{j!=k} U_j`` for a ``(p_k, r_k)`` block."""
    return multi_mode_product(mode_product(g.core, block, k), g.factors, skip=k)
