"""
Low-degree sample-size threshold and the sample-size gap table.
"""

import logging
from typing import Sequence

import numpy as np
import pandas as pd

from ..core.exceptions import InvalidArgumentError
from ..regression.instance import degrees_of_freedom

logger = logging.getLogger(__name__)

GAP_TABLE_COLUMNS = [
    "p",
    "d",
    "r_star",
    "degrees_of_freedom",
    "statistical_proxy_rstar_p",
    "algorithmic_proxy_rstar_p_half_d",
    "ld_threshold",
    "ld_to_algorithmic_ratio",
]


def _check_delta(delta: float, operation: str) -> None:
    if not 0.0 < delta < 1.0:
        raise InvalidArgumentError(
            f"delta must lie in (0, 1), got {delta}", operation=operation, field="delta"
        )


def ld_sample_threshold(
    p: float, d: int, degree_D: int, delta: float, sigma_sq: float
) -> float:
    """Sample size below which degree-``D`` tests have advantage at most
    ``delta / (1 - delta)``.

    Evaluates ``(p / (d D))^{d/2} * delta / (2 (1 - sigma^2))``.

    Raises:
        InvalidArgumentError: If ``p < 1``, ``d < 1``, ``degree_D < 1``,
            ``delta`` is outside ``(0, 1)`` or ``sigma_sq`` outside ``[0, 1)``.
    """
    operation = "ld_sample_threshold"
    if p < 1:
        raise InvalidArgumentError(f"p must be >= 1, got {p}", operation, field="p")
    if d < 1:
        raise InvalidArgumentError(f"d must be >= 1, got {d}", operation, field="d")
    if degree_D < 1:
        raise InvalidArgumentError(
            f"degree must be >= 1, got {degree_D}", operation, field="degree_D"
        )
    _check_delta(delta, operation)
    if not 0.0 <= sigma_sq < 1.0:
        raise InvalidArgumentError(
            f"sigma_sq must lie in [0, 1), got {sigma_sq}", operation, field="sigma_sq"
        )
    return (p / (d * degree_D)) ** (d / 2) * delta / (2.0 * (1.0 - sigma_sq))


def ld_advantage_bound(delta: float) -> float:
    """``delta / (1 - delta)``."""
    _check_delta(delta, "ld_advantage_bound")
    return delta / (1.0 - delta)


def gap_table(
    p_grid: Sequence[int],
    d: int,
    r_star: int,
    degree_D: int,
    delta: float,
    sigma_sq: float,
) -> pd.DataFrame:
    """Statistical, algorithmic and low-degree sample sizes for each ``p``.

    The statistical and algorithmic columns are constant-free power laws
    (``r* p`` and ``r* p^{d/2}``); only ``ld_threshold`` carries constants.

    Raises:
        InvalidArgumentError: If ``p_grid`` is empty or ``r_star`` exceeds a
            grid dimension.
    """
    if len(p_grid) == 0:
        raise InvalidArgumentError("p grid is empty", "gap_table", field="p_grid")
    rows = []
    for p in sorted(int(v) for v in p_grid):
        if not 1 <= r_star <= p:
            raise InvalidArgumentError(
                f"r_star={r_star} not in [1, p={p}]", "gap_table", field="r_star"
            )
        algorithmic = float(r_star * np.power(p, d / 2))
        threshold = ld_sample_threshold(p, d, degree_D, delta, sigma_sq)
        rows.append(
            {
                "p": p,
                "d": d,
                "r_star": r_star,
                "degrees_of_freedom": degrees_of_freedom([p] * d, [r_star] * d),
                "statistical_proxy_rstar_p": float(r_star * p),
                "algorithmic_proxy_rstar_p_half_d": algorithmic,
                "ld_threshold": threshold,
                "ld_to_algorithmic_ratio": threshold / algorithmic,
            }
        )
    logger.debug(f"Gap table over {len(rows)} grid points for d={d}")
    return pd.DataFrame(rows, columns=GAP_TABLE_COLUMNS)
