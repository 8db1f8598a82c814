"""
Problem instances: Gaussian ensemble generation, persistence and summaries.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel

from ..core.exceptions import InvalidArgumentError
from ..core.io import load_tensor, save_tensor
from ..core.tensor import DenseTensor, matricize
from ..tucker.decomposition import TuckerTensor
from ..tucker.linalg import random_orthonormal
from .design import DesignKind, LinearDesign, apply

logger = logging.getLogger(__name__)

METADATA_FILE = "instance.json"


@dataclass(frozen=True)
class ProblemInstance:
    """Observations ``Y = A(X*) + scale * E`` together with their design.

    Attributes:
        design: Measurement operator.
        observations: Tensor of shape ``(n, p_{d+1}, ..., p_{d+m})``.
        ground_truth: ``X*`` when known.
        noise_sigma: Standard deviation of the raw noise entries.
        seed: Generator seed, when generated.
    """

    design: LinearDesign
    observations: DenseTensor
    ground_truth: Optional[TuckerTensor] = None
    noise_sigma: float = 0.0
    seed: Optional[int] = None

    def __post_init__(self):
        if self.observations.shape != self.design.observation_shape:
            raise InvalidArgumentError(
                f"observations of shape {self.observations.shape}, design expects "
                f"{self.design.observation_shape}",
                operation="ProblemInstance",
                field="observations",
            )

    @property
    def param_shape(self) -> Tuple[int, ...]:
        return self.design.param_shape

    @property
    def truth_dense(self) -> Optional[DenseTensor]:
        return None if self.ground_truth is None else self.ground_truth.dense()


class InstanceMetadata(BaseModel):
    """Metadata record stored next to the tensor dumps of an instance."""

    dims: Tuple[int, ...]
    d: int
    m: int
    n: int
    sigma: float
    seed: Optional[int] = None
    kind: DesignKind
    scale: float
    r_star: Optional[Tuple[int, ...]] = None


def _rank_tuple(rank: Union[int, Sequence[int]], order: int) -> Tuple[int, ...]:
    if isinstance(rank, (int, np.integer)):
        return (int(rank),) * order
    return tuple(int(r) for r in rank)


def generate_gaussian_instance(
    dims: Sequence[int],
    d: int,
    m: int,
    r_star: Union[int, Sequence[int]],
    sigma: float,
    n: int,
    seed: int,
    kind: DesignKind = DesignKind.GENERAL,
) -> ProblemInstance:
    """Draw a Gaussian ensemble instance with a random Tucker-rank ``r_star`` truth.

    The core has N(0, 1) entries and the factors are Haar-distributed.
    Covariates and raw noise have N(0, 1) and N(0, sigma^2) entries; the design
    scale ``1/sqrt(n)`` is applied to both sides of the model.
    """
    dims = tuple(int(p) for p in dims)
    kind = DesignKind(kind)
    if len(dims) != d + m or d < 1 or m < 0:
        raise InvalidArgumentError(
            f"dims {dims} do not split into d={d} covariate and m={m} response modes",
            operation="generate_gaussian_instance",
            field="dims",
        )
    if any(p < 1 for p in dims):
        raise InvalidArgumentError(
            f"every extent must be positive, got {dims}",
            operation="generate_gaussian_instance",
            field="dims",
        )
    if kind is DesignKind.VECTOR and d != 1:
        raise InvalidArgumentError(
            "vector designs have d = 1", operation="generate_gaussian_instance", field="d"
        )
    if kind is DesignKind.MATRIX_TRACE and (d != 2 or m != 0):
        raise InvalidArgumentError(
            "matrix trace designs have d = 2 and m = 0",
            operation="generate_gaussian_instance",
            field="d",
        )
    rank = _rank_tuple(r_star, len(dims))
    if len(rank) != len(dims) or any(not 1 <= r <= p for r, p in zip(rank, dims)):
        raise InvalidArgumentError(
            f"true rank {rank} incompatible with dims {dims}",
            operation="generate_gaussian_instance",
            field="r_star",
        )
    if n < 1:
        raise InvalidArgumentError(
            "n must be at least 1", operation="generate_gaussian_instance", field="n"
        )
    if sigma < 0:
        raise InvalidArgumentError(
            "sigma must be non-negative", operation="generate_gaussian_instance", field="sigma"
        )

    rng = np.random.Generator(np.random.PCG64(seed))
    core = rng.standard_normal(rank)
    factors = tuple(random_orthonormal(rng, p, r) for p, r in zip(dims, rank))
    truth = TuckerTensor(core, factors)
    covariates = rng.standard_normal((n,) + dims[:d])
    design = LinearDesign(kind, covariates, dims, 1.0 / np.sqrt(n))
    observations = apply(design, truth.dense())
    if sigma > 0:
        noise = sigma * rng.standard_normal((n,) + dims[d:])
        observations = observations + design.scale * noise
    logger.debug(
        f"Generated {kind.value} instance dims={dims} r*={rank} n={n} sigma={sigma} "
        f"seed={seed}"
    )
    return ProblemInstance(design, observations, truth, float(sigma), seed)


def degrees_of_freedom(dims: Sequence[int], rank: Sequence[int]) -> int:
    """``sum r_i (p_i - r_i) + prod r_i``."""
    return sum(r * (p - r) for p, r in zip(dims, rank)) + int(np.prod(rank))


def min_mode_singular_value(x: DenseTensor, r_star: Sequence[int]) -> float:
    """``min_k sigma_{r*_k}(M_k(x))``."""
    values = []
    for k, r in enumerate(r_star):
        s = np.linalg.svd(matricize(x, k), compute_uv=False)
        values.append(float(s[r - 1]) if r <= s.shape[0] else 0.0)
    return min(values)


def save_instance(directory: Union[str, Path], instance: ProblemInstance) -> Path:
    """Write metadata plus flat-text dumps of covariates, observations and truth."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    design = instance.design
    truth = instance.ground_truth
    meta = InstanceMetadata(
        dims=design.param_shape,
        d=design.d,
        m=design.m,
        n=design.n,
        sigma=instance.noise_sigma,
        seed=instance.seed,
        kind=design.kind,
        scale=design.scale,
        r_star=None if truth is None else truth.rank,
    )
    (directory / METADATA_FILE).write_text(meta.model_dump_json(indent=2))
    save_tensor(directory / "covariates.txt", design.covariates)
    save_tensor(directory / "observations.txt", instance.observations)
    if truth is not None:
        save_tensor(directory / "truth_core.txt", truth.core)
        for k, u in enumerate(truth.factors):
            save_tensor(directory / f"truth_factor_{k}.txt", u)
    logger.info(f"Saved instance to {directory}")
    return directory


def load_instance(directory: Union[str, Path]) -> ProblemInstance:
    """Read an instance written by :func:`save_instance`."""
    directory = Path(directory)
    meta = InstanceMetadata.model_validate(
        json.loads((directory / METADATA_FILE).read_text())
    )
    design = LinearDesign(
        meta.kind, load_tensor(directory / "covariates.txt"), meta.dims, meta.scale
    )
    truth = None
    if meta.r_star is not None:
        core = load_tensor(directory / "truth_core.txt")
        factors = tuple(
            load_tensor(directory / f"truth_factor_{k}.txt") for k in range(len(meta.dims))
        )
        truth = TuckerTensor(np.reshape(core, meta.r_star, order="F"), factors)
    observations = np.reshape(
        load_tensor(directory / "observations.txt"), design.observation_shape, order="F"
    )
    return ProblemInstance(design, observations, truth, meta.sigma, meta.seed)


def relative_error(x: DenseTensor, truth: DenseTensor) -> float:
    """``||x - truth||_F / ||truth||_F``."""
    return float(np.linalg.norm(x - truth) / np.linalg.norm(truth))
