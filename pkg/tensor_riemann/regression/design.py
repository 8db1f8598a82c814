"""
Linear measurement operators for tensor-on-tensor regression.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple

import numpy as np

from ..core.exceptions import InvalidArgumentError
from ..core.tensor import DenseTensor, Matrix, mode_product


class DesignKind(str, Enum):
    """Shape of the covariates behind a design."""

    GENERAL = "general"  # n covariate tensors of shape (p_1, ..., p_d)
    VECTOR = "vector"  # one n x p_1 covariate matrix (tensor-on-vector)
    MATRIX_TRACE = "matrix_trace"  # GENERAL with d = 2, m = 0


@dataclass(frozen=True)
class LinearDesign:
    """Measurement operator ``A(X)_i = scale * <A_i, X>_*``.

    Attributes:
        kind: Covariate layout.
        covariates: Stacked covariates of shape ``(n, p_1, ..., p_d)``; for
            ``VECTOR`` designs this is the ``n x p_1`` matrix ``A``.
        param_shape: Shape ``(p_1, ..., p_{d+m})`` of the parameter tensor.
        scale: Multiplier applied to every measurement.
    """

    kind: DesignKind
    covariates: np.ndarray
    param_shape: Tuple[int, ...]
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", DesignKind(self.kind))
        object.__setattr__(self, "param_shape", tuple(int(p) for p in self.param_shape))
        if self.covariates.ndim < 2 or self.covariates.shape[0] < 1:
            raise InvalidArgumentError(
                f"covariates of shape {self.covariates.shape} hold no samples",
                operation="LinearDesign",
                field="covariates",
            )
        if self.kind is DesignKind.VECTOR and self.covariates.ndim != 2:
            raise InvalidArgumentError(
                "vector designs take an n x p_1 covariate matrix",
                operation="LinearDesign",
                field="covariates",
            )
        d = self.covariates.ndim - 1
        if self.param_shape[:d] != self.covariates.shape[1:]:
            raise InvalidArgumentError(
                f"covariate shape {self.covariates.shape[1:]} does not lead "
                f"parameter shape {self.param_shape}",
                operation="LinearDesign",
                field="param_shape",
            )
        if self.kind is DesignKind.MATRIX_TRACE and (d != 2 or len(self.param_shape) != 2):
            raise InvalidArgumentError(
                "matrix trace designs need d = 2 and m = 0",
                operation="LinearDesign",
                field="kind",
            )

    @property
    def n(self) -> int:
        return int(self.covariates.shape[0])

    @property
    def d(self) -> int:
        return self.covariates.ndim - 1

    @property
    def m(self) -> int:
        return len(self.param_shape) - self.d

    @property
    def covariate_shape(self) -> Tuple[int, ...]:
        return self.param_shape[: self.d]

    @property
    def response_shape(self) -> Tuple[int, ...]:
        return self.param_shape[self.d :]

    @property
    def observation_shape(self) -> Tuple[int, ...]:
        return (self.n,) + self.response_shape

    def as_general(self) -> "LinearDesign":
        """The same operator viewed as ``n`` covariate tensors."""
        return LinearDesign(
            DesignKind.GENERAL, self.covariates, self.param_shape, self.scale
        )

    @classmethod
    def identity(cls, shape: Sequence[int], m: int = 0) -> "LinearDesign":
        """Isometric design ``A = vec`` over the leading ``len(shape) - m`` modes."""
        shape = tuple(int(p) for p in shape)
        lead = shape[: len(shape) - m]
        size = int(np.prod(lead))
        covariates = np.reshape(np.eye(size), (size,) + lead, order="F")
        kind = DesignKind.MATRIX_TRACE if len(shape) == 2 and m == 0 else DesignKind.GENERAL
        return cls(kind, covariates, shape, 1.0)


def _check_param(design: LinearDesign, x: DenseTensor, operation: str) -> None:
    if x.shape != design.param_shape:
        raise InvalidArgumentError(
            f"parameter of shape {x.shape}, design expects {design.param_shape}",
            operation=operation,
            field="x",
        )


def apply(design: LinearDesign, x: DenseTensor) -> DenseTensor:
    """Forward map: observations of shape ``(n, p_{d+1}, ..., p_{d+m})``."""
    _check_param(design, x, "apply")
    if design.kind is DesignKind.VECTOR:
        return mode_product(x, design.scale * design.covariates, 0)
    d = design.d
    out = np.tensordot(design.covariates, x, axes=(list(range(1, d + 1)), list(range(d))))
    return design.scale * out


def adjoint(design: LinearDesign, r: DenseTensor) -> DenseTensor:
    """Adjoint map ``A*(r)_{[k, j]} = scale * sum_i r_{[i, j]} A_{i[k]}``."""
    if r.shape != design.observation_shape:
        raise InvalidArgumentError(
            f"residual of shape {r.shape}, design expects {design.observation_shape}",
            operation="adjoint",
            field="r",
        )
    if design.kind is DesignKind.VECTOR:
        return mode_product(r, design.scale * design.covariates.T, 0)
    return design.scale * np.tensordot(design.covariates, r, axes=(0, 0))


def vector_design_matrix(design: LinearDesign) -> Matrix:
    """The scaled covariate matrix ``scale * A`` of a vector design."""
    if design.kind is not DesignKind.VECTOR:
        raise InvalidArgumentError(
            f"expected a vector design, got {design.kind.value}",
            operation="vector_design_matrix",
            field="kind",
        )
    return design.scale * design.covariates
