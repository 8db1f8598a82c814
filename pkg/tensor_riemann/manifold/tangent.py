"""
Parameterized tangent vectors ``(B, {D_k})`` and their dense images.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
import scipy.linalg

from ..core.exceptions import InvalidArgumentError
from ..core.tensor import DenseTensor, Matrix, frob_norm, multi_mode_product
from .gauge import Gauge, core_perturbation, project_tangent

TANGENT_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class TangentVector:
    """``B x_k U_k + sum_k S x_k U_{k,perp} D_k x_{j!=k} U_j`` at a gauge.

    Attributes:
        gauge: Base point gauge.
        b: Core perturbation of shape ``(r_0, ..., r_{D-1})``.
        d: Off-subspace blocks ``D_k`` of shape ``(p_k - r_k, r_k)``.
    """

    gauge: Gauge
    b: DenseTensor
    d: Tuple[Matrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(self.d))
        g = self.gauge
        if self.b.shape != g.rank:
            raise InvalidArgumentError(
                f"core block {self.b.shape} does not match rank {g.rank}",
                operation="TangentVector",
                field="b",
            )
        if len(self.d) != g.order:
            raise InvalidArgumentError(
                f"{len(self.d)} D blocks for an order-{g.order} point",
                operation="TangentVector",
                field="d",
            )
        for k, dk in enumerate(self.d):
            expected = (g.shape[k] - g.rank[k], g.rank[k])
            if dk.shape != expected:
                raise InvalidArgumentError(
                    f"D_{k} has shape {dk.shape}, expected {expected}",
                    operation="TangentVector",
                    field="d",
                )

    def to_vector(self) -> np.ndarray:
        """Flatten ``(B, D_0, ..., D_{D-1})`` column-major into one vector."""
        parts = [np.ravel(self.b, order="F")]
        parts.extend(np.ravel(dk, order="F") for dk in self.d)
        return np.concatenate(parts)

    @classmethod
    def from_vector(cls, gauge: Gauge, vec: np.ndarray) -> "TangentVector":
        if vec.shape != (tangent_dimension(gauge.shape, gauge.rank),):
            raise InvalidArgumentError(
                f"parameter vector of length {vec.shape} does not match the "
                f"tangent dimension",
                operation="TangentVector.from_vector",
                field="vec",
            )
        size_b = int(np.prod(gauge.rank))
        b = np.reshape(vec[:size_b], gauge.rank, order="F")
        offset = size_b
        blocks = []
        for p, r in zip(gauge.shape, gauge.rank):
            size = (p - r) * r
            blocks.append(np.reshape(vec[offset : offset + size], (p - r, r), order="F"))
            offset += size
        return cls(gauge=gauge, b=b, d=tuple(blocks))


def tangent_dimension(shape: Sequence[int], rank: Sequence[int]) -> int:
    """Manifold dimension ``prod r_k + sum r_k (p_k - r_k)``."""
    return int(np.prod(rank)) + sum(r * (p - r) for p, r in zip(shape, rank))


def tangent_to_dense(tv: TangentVector) -> DenseTensor:
    """Dense ambient image of a parameterized tangent vector."""
    g = tv.gauge
    out = multi_mode_product(tv.b, g.factors)
    for k, dk in enumerate(tv.d):
        out = out + core_perturbation(g, k, g.u_perp[k] @ dk)
    return out


def dense_to_tangent(g: Gauge, z: DenseTensor) -> TangentVector:
    """Recover ``(B, {D_k})`` from a dense tangent tensor.

    ``D_k`` solves ``D_k M_k(S) V_k = U_{k,perp}^T M_k(z) W_k`` with
    ``M_k(S) V_k = R_k^T``.

    Raises:
        InvalidArgumentError: If ``z`` is not in the tangent space.
        DegeneratePointError: If the gauge is padded; the ``D_k`` are not
            unique there.
    """
    g.require_unpadded("dense_to_tangent")
    norm = frob_norm(z)
    residual = frob_norm(z - project_tangent(g, z))
    if residual > TANGENT_RESIDUAL_TOL * max(norm, 1.0):
        raise InvalidArgumentError(
            f"tensor is not tangent (projection residual {residual:.3e})",
            operation="dense_to_tangent",
            field="z",
        )
    b = multi_mode_product(z, g.factors, transpose=True)
    blocks: List[Matrix] = []
    for k in range(g.order):
        rhs = g.u_perp[k].T @ g.row_space_product(z, k)
        blocks.append(scipy.linalg.solve_triangular(g.r_tri[k], rhs.T, lower=False).T)
    return TangentVector(gauge=g, b=b, d=tuple(blocks))


def tangent_basis(g: Gauge) -> np.ndarray:
    """Dense images of the unit parameter vectors, one column per coordinate.

    Intended for small problems: the result is ``prod(p) x dim`` dense.
    """
    dim = tangent_dimension(g.shape, g.rank)
    columns = np.empty((int(np.prod(g.shape)), dim))
    unit = np.zeros(dim)
    for i in range(dim):
        unit[i] = 1.0
        image = tangent_to_dense(TangentVector.from_vector(g, unit))
        columns[:, i] = np.ravel(image, order="F")
        unit[i] = 0.0
    return columns
