"""
Sampled restricted-isometry diagnostics over low-Tucker-rank tensors.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core.exceptions import InvalidArgumentError
from ..tucker.decomposition import TuckerTensor, validate_rank
from ..tucker.linalg import random_orthonormal
from .design import LinearDesign, apply

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TripEstimate:
    """Extremes of ``||A(z)||_F^2`` over sampled unit tensors.

    The constant ``max(1 - rmin, rmax - 1)`` only bounds the true isometry
    constant from below.
    """

    rmin: float
    rmax: float
    trials: int

    @property
    def constant(self) -> float:
        return max(1.0 - self.rmin, self.rmax - 1.0)


def random_unit_tucker(
    rng: np.random.Generator, shape: Sequence[int], rank: Sequence[int]
) -> TuckerTensor:
    """Gaussian core and Haar factors, scaled to unit Frobenius norm."""
    core = rng.standard_normal(tuple(rank))
    core /= np.linalg.norm(core)
    factors = tuple(random_orthonormal(rng, p, r) for p, r in zip(shape, rank))
    return TuckerTensor(core, factors)


def estimate_trip(
    design: LinearDesign, rank: Sequence[int], trials: int, seed: int
) -> TripEstimate:
    """Estimate the Tucker-rank restricted isometry constant by sampling."""
    if trials < 1:
        raise InvalidArgumentError(
            "trials must be at least 1", operation="estimate_trip", field="trials"
        )
    rank = validate_rank(design.param_shape, rank, "estimate_trip")
    rng = np.random.Generator(np.random.PCG64(seed))
    energies = np.empty(trials)
    for t in range(trials):
        z = random_unit_tucker(rng, design.param_shape, rank).dense()
        energies[t] = float(np.sum(apply(design, z) ** 2))
    estimate = TripEstimate(float(energies.min()), float(energies.max()), trials)
    logger.debug(
        f"TRIP sample over {trials} draws: rmin={estimate.rmin:.4f} "
        f"rmax={estimate.rmax:.4f} constant={estimate.constant:.4f}"
    )
    return estimate
