"""
Dense multilinear algebra on float64 numpy arrays.

Tensors are plain ``numpy.ndarray`` values. The flat layout follows the
column-major convention: the linear index of ``t[i_0, ..., i_{D-1}]`` is
``i_0 + sum_l i_l * prod_{z<l} p_z``, so the mode-0 unfolding is a reshape of
the flat data and every other unfolding moves one axis to the front.

Modes are 0-based throughout the library.
"""

from typing import Optional, Sequence

import numpy as np

from .exceptions import InvalidArgumentError

DenseTensor = np.ndarray
Matrix = np.ndarray


def as_tensor(data, shape: Optional[Sequence[int]] = None) -> DenseTensor:
    """Coerce ``data`` to a float64 tensor, optionally from flat column-major data.

    Args:
        data: Array-like tensor values, or flat values when ``shape`` is given.
        shape: Target extents for flat data.

    Returns:
        A float64 ndarray with at least one mode.

    Raises:
        InvalidArgumentError: If the data does not fill ``shape`` or a mode is
            empty.
    """
    arr = np.asarray(data, dtype=np.float64)
    if shape is not None:
        shape = tuple(int(p) for p in shape)
        if arr.size != int(np.prod(shape)):
            raise InvalidArgumentError(
                f"data length {arr.size} does not match shape {shape}",
                operation="as_tensor",
                field="shape",
            )
        arr = np.reshape(arr.ravel(order="F"), shape, order="F")
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if any(p < 1 for p in arr.shape):
        raise InvalidArgumentError(
            f"every extent must be positive, got {arr.shape}",
            operation="as_tensor",
            field="shape",
        )
    return arr


def flat_data(t: DenseTensor) -> np.ndarray:
    """Return the column-major flat data of ``t``."""
    return np.ravel(t, order="F")


def _check_mode(t: DenseTensor, k: int, operation: str) -> int:
    if not 0 <= k < t.ndim:
        raise InvalidArgumentError(
            f"mode {k} out of range for order-{t.ndim} tensor",
            operation=operation,
            field="k",
        )
    return k


def matricize(t: DenseTensor, k: int) -> Matrix:
    """Mode-k unfolding: a ``p_k x prod_{j!=k} p_j`` matrix.

    Column ``j`` of the unfolding enumerates the remaining indices with the
    lowest remaining mode varying fastest.
    """
    _check_mode(t, k, "matricize")
    return np.reshape(np.moveaxis(t, k, 0), (t.shape[k], -1), order="F")


def tensorize(m: Matrix, k: int, shape: Sequence[int]) -> DenseTensor:
    """Inverse of :func:`matricize` for a tensor of the given shape."""
    shape = tuple(int(p) for p in shape)
    if not 0 <= k < len(shape):
        raise InvalidArgumentError(
            f"mode {k} out of range for order-{len(shape)} shape",
            operation="tensorize",
            field="k",
        )
    rest = shape[:k] + shape[k + 1 :]
    expected = (shape[k], int(np.prod(rest)) if rest else 1)
    if m.shape != expected:
        raise InvalidArgumentError(
            f"matrix of shape {m.shape} cannot fold into mode {k} of {shape}",
            operation="tensorize",
            field="m",
        )
    folded = np.reshape(m, (shape[k],) + rest, order="F")
    return np.moveaxis(folded, 0, k)


def mode_product(t: DenseTensor, b: Matrix, k: int) -> DenseTensor:
    """Mode-k product ``t x_k b``; mode ``k`` of the result has ``b.shape[0]`` entries."""
    _check_mode(t, k, "mode_product")
    if b.ndim != 2 or b.shape[1] != t.shape[k]:
        raise InvalidArgumentError(
            f"matrix {b.shape} incompatible with mode {k} of extent {t.shape[k]}",
            operation="mode_product",
            field="b",
        )
    return np.moveaxis(np.tensordot(b, t, axes=(1, k)), 0, k)


def multi_mode_product(
    t: DenseTensor,
    matrices: Sequence[Optional[Matrix]],
    modes: Optional[Sequence[int]] = None,
    transpose: bool = False,
    skip: Optional[int] = None,
) -> DenseTensor:
    """Apply a mode product along several modes.

    Args:
        t: Input tensor.
        matrices: One matrix per entry of ``modes``; ``None`` entries are skipped.
        modes: Modes to multiply along (defaults to ``range(len(matrices))``).
        transpose: Multiply by the transposes instead.
        skip: A mode to leave untouched.
    """
    if modes is None:
        modes = range(len(matrices))
    out = t
    for mat, k in zip(matrices, modes):
        if mat is None or k == skip:
            continue
        out = mode_product(out, mat.T if transpose else mat, k)
    return out


def contracted_inner(a: DenseTensor, x: DenseTensor):
    """Contract ``a`` against the leading ``a.ndim`` modes of ``x``.

    Returns a tensor over the trailing modes of ``x``, or a float when ``x``
    has no trailing modes.
    """
    d = a.ndim
    if x.ndim < d or x.shape[:d] != a.shape:
        raise InvalidArgumentError(
            f"leading extents of {x.shape} do not match {a.shape}",
            operation="contracted_inner",
            field="x",
        )
    out = np.tensordot(a, x, axes=d)
    if x.ndim == d:
        return float(out)
    return out


def inner(x: DenseTensor, y: DenseTensor) -> float:
    """Euclidean inner product of two equally shaped tensors."""
    if x.shape != y.shape:
        raise InvalidArgumentError(
            f"shape mismatch {x.shape} vs {y.shape}", operation="inner", field="y"
        )
    return float(np.vdot(x, y))


def frob_norm(x: DenseTensor) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(np.ravel(x)))


def tucker_rank(t: DenseTensor, tol: float = 1e-9) -> tuple:
    """Numerical Tucker rank: per mode, singular values above ``tol * sigma_1``."""
    ranks = []
    for k in range(t.ndim):
        s = np.linalg.svd(matricize(t, k), compute_uv=False)
        if s.size == 0 or s[0] == 0.0:
            ranks.append(0)
            continue
        ranks.append(int(np.count_nonzero(s > tol * s[0])))
    return tuple(ranks)
