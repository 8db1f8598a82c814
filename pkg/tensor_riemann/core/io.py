"""
Flat-text tensor dumps.

Format: a ``# shape p_0 p_1 ...`` header line followed by the column-major
flat data, one value per line with 17 significant digits.
"""

import logging
from pathlib import Path
from typing import Union

import numpy as np

from .exceptions import InvalidArgumentError
from .tensor import DenseTensor, as_tensor, flat_data

logger = logging.getLogger(__name__)

_HEADER_PREFIX = "shape"


def save_tensor(path: Union[str, Path], t: DenseTensor) -> Path:
    """Write ``t`` to ``path`` and return the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = " ".join([_HEADER_PREFIX] + [str(p) for p in t.shape])
    np.savetxt(path, flat_data(t), fmt="%.17g", header=header, comments="# ")
    logger.debug(f"Saved tensor {t.shape} to {path}")
    return path


def load_tensor(path: Union[str, Path]) -> DenseTensor:
    """Read a tensor written by :func:`save_tensor`."""
    path = Path(path)
    with path.open() as fh:
        first = fh.readline().lstrip("#").split()
    if not first or first[0] != _HEADER_PREFIX:
        raise InvalidArgumentError(
            f"missing shape header in {path}", operation="load_tensor", field="path"
        )
    shape = tuple(int(p) for p in first[1:])
    data = np.loadtxt(path, comments="#", dtype=np.float64, ndmin=1)
    return as_tensor(data, shape=shape)
