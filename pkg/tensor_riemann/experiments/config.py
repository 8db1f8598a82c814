"""
Experiment configuration: JSON files, command-line overrides and protocol defaults.
"""

import hashlib
import json
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from ..regression.design import DesignKind
from ..solvers.config import Algorithm, SolverConfig
from ..tucker.config import Retraction
from .exceptions import ConfigValidationError, ExperimentIOError

logger = logging.getLogger(__name__)

MAX_SEED = (1 << 64) - 1


class ExperimentKind(str, Enum):
    """Experiment protocols run by the harness."""

    CONVERGENCE = "convergence"
    RANK_SWEEP = "rank_sweep"
    PHASE = "phase"
    COMPARE = "compare"
    LDP_TABLE = "ldp_table"


class ModelKind(str, Enum):
    """Regression model families."""

    SCALAR_TENSOR = "scalar-tensor"
    TENSOR_VECTOR = "tensor-vector"
    MATRIX_TRACE = "matrix-trace"
    GENERAL = "general"

    @property
    def design_kind(self) -> DesignKind:
        if self is ModelKind.TENSOR_VECTOR:
            return DesignKind.VECTOR
        if self is ModelKind.MATRIX_TRACE:
            return DesignKind.MATRIX_TRACE
        return DesignKind.GENERAL


class NRule(str, Enum):
    """Sample-size rules ``n = c * f(p, r*)``."""

    P32_RSTAR = "p32_rstar"  # c * p^{3/2} * r*
    P2_OVER_LAMBDA2 = "p2_over_lambda2"  # c * p^2 / lambda^2, lambda from the truth


class SearchMode(str, Enum):
    GRID = "grid"
    INCREMENTAL = "incremental"


MODEL_DEFAULTS: Dict[ModelKind, Dict[str, Any]] = {
    ModelKind.SCALAR_TENSOR: {"dims": [30, 30, 30], "d": 3, "m": 0, "r_star": 3},
    ModelKind.TENSOR_VECTOR: {"dims": [30, 30, 30, 30], "d": 1, "m": 3, "r_star": 3},
    ModelKind.MATRIX_TRACE: {"dims": [100, 100], "d": 2, "m": 0, "r_star": 1},
    ModelKind.GENERAL: {"dims": [6, 5, 4], "d": 2, "m": 1, "r_star": 2},
}


class ModelSection(BaseModel):
    """Regression model and noise level."""

    kind: ModelKind = ModelKind.SCALAR_TENSOR
    dims: List[int] = Field(default_factory=lambda: [30, 30, 30], min_length=1)
    d: int = Field(3, ge=1)
    m: int = Field(0, ge=0)
    r_star: int = Field(3, ge=1)
    sigma: float = Field(0.0, ge=0.0)

    class Config:
        extra = "forbid"

    @model_validator(mode="after")
    def _check_layout(self) -> "ModelSection":
        if any(p < 1 for p in self.dims):
            raise ValueError(f"dims must be positive, got {self.dims}")
        if len(self.dims) != self.d + self.m:
            raise ValueError(
                f"dims {self.dims} do not split into d={self.d} and m={self.m} modes"
            )
        if self.kind is ModelKind.SCALAR_TENSOR and self.m != 0:
            raise ValueError("scalar-tensor models need m = 0")
        if self.kind is ModelKind.TENSOR_VECTOR and self.d != 1:
            raise ValueError("tensor-vector models need d = 1")
        if self.kind is ModelKind.MATRIX_TRACE and (self.d != 2 or self.m != 0):
            raise ValueError("matrix-trace models need d = 2 and m = 0")
        if self.r_star > min(self.dims):
            raise ValueError(f"r_star={self.r_star} exceeds the smallest dimension")
        return self

    @classmethod
    def for_kind(cls, kind: Union[ModelKind, str], sigma: float = 0.0) -> "ModelSection":
        kind = ModelKind(kind)
        return cls(kind=kind, sigma=sigma, **MODEL_DEFAULTS[kind])


class GridSection(BaseModel):
    """Sample sizes, input ranks and replicates."""

    n: List[int] = Field(default_factory=list)
    """Explicit sample sizes; ignored when ``n_rule`` is set."""

    n_rule: Optional[NRule] = None
    n_constants: List[float] = Field(default_factory=lambda: [8.0], min_length=1)
    """Constants ``c`` of ``n_rule``, one grid point each."""

    r: List[int] = Field(default_factory=list)
    """Input ranks; empty means the true rank."""

    seeds: int = Field(10, ge=1)
    base_seed: int = Field(0, ge=0, le=MAX_SEED)
    search: SearchMode = SearchMode.GRID
    n_step: int = Field(100, ge=1)
    success_fraction: float = Field(0.5, gt=0.0, le=1.0)
    """Share of successful seeds for a grid cell to count as recovered."""

    class Config:
        extra = "forbid"

    @field_validator("n", "r")
    @classmethod
    def _positive(cls, values: List[int]) -> List[int]:
        if any(v < 1 for v in values):
            raise ValueError("grid values must be at least 1")
        return values

    @field_validator("n_constants")
    @classmethod
    def _positive_constants(cls, values: List[float]) -> List[float]:
        if any(c <= 0 for c in values):
            raise ValueError("n_constants must be positive")
        return values


class SolverSection(BaseModel):
    """Algorithms and their settings."""

    algorithms: List[Algorithm] = Field(
        default_factory=lambda: [Algorithm.RGN], min_length=1
    )
    max_iters: int = Field(300, ge=1)
    tol_rel_rmse: float = Field(1e-13, ge=0.0)
    retraction: Optional[Retraction] = None
    """Defaults to the matrix SVD for matrix-trace models and ST-HOSVD otherwise."""

    baseline_stepsizes: List[float] = Field(
        default_factory=lambda: [0.1, 0.25, 0.5, 0.75, 1.0], min_length=1
    )
    baseline_trial_iters: int = Field(20, ge=1)
    ridge_eps: float = Field(1e-12, ge=0.0)
    use_closed_form: bool = True
    hooi_inplace: bool = False
    success_threshold: float = Field(0.01, gt=0.0)
    """A run recovers the truth when its final relative RMSE is below this."""

    class Config:
        extra = "forbid"


class LdpSection(BaseModel):
    """Low-degree threshold table and Monte Carlo checks."""

    orders: List[int] = Field(default_factory=lambda: [2, 3], min_length=1)
    p_grid: List[int] = Field(
        default_factory=lambda: [10, 20, 30, 50, 90, 100, 200], min_length=1
    )
    r_star: int = Field(1, ge=1)
    degree: int = Field(5, ge=1)
    delta: float = Field(0.5, gt=0.0, lt=1.0)
    sigma_sq: float = Field(0.0, ge=0.0, lt=1.0)
    mc_profiles: int = Field(50, ge=0)
    mc_samples: int = Field(1_000_000, ge=1000)
    max_degree: int = Field(3, ge=0)
    max_width: int = Field(3, ge=1)
    u_budget: float = Field(0.9, ge=0.0, le=1.0)

    class Config:
        extra = "forbid"


class OutputSection(BaseModel):
    path: Optional[str] = None
    """CSV destination; standard output when unset."""

    experiment_id: Optional[str] = None

    class Config:
        extra = "forbid"


class ExperimentConfig(BaseModel):
    """Complete description of one experiment run."""

    experiment: ExperimentKind = ExperimentKind.CONVERGENCE
    model: ModelSection = Field(default_factory=ModelSection)
    grid: GridSection = Field(default_factory=GridSection)
    solver: SolverSection = Field(default_factory=SolverSection)
    ldp: LdpSection = Field(default_factory=LdpSection)
    output: OutputSection = Field(default_factory=OutputSection)

    class Config:
        extra = "forbid"

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        """Validate a raw mapping.

        Raises:
            ConfigValidationError: Naming the first offending field.
        """
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            err = e.errors()[0]
            field = ".".join(str(part) for part in err["loc"]) or None
            raise ConfigValidationError(err["msg"], field=field) from e

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ExperimentConfig":
        """Read a JSON config file.

        Raises:
            ExperimentIOError: If the file cannot be read or parsed.
            ConfigValidationError: If its content is invalid.
        """
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except OSError as e:
            raise ExperimentIOError(f"cannot read config: {e}", path=str(path)) from e
        except json.JSONDecodeError as e:
            raise ExperimentIOError(f"config is not valid JSON: {e}", path=str(path)) from e
        if not isinstance(data, dict):
            raise ConfigValidationError("config root must be an object")
        logger.info(f"Loaded experiment config from {path}")
        return cls.from_dict(data)

    @classmethod
    def default_for(
        cls, kind: Union[ExperimentKind, str], model: Optional[ModelKind] = None
    ) -> "ExperimentConfig":
        """Protocol defaults of each experiment at desk scale (10 replicates)."""
        kind = ExperimentKind(kind)
        if kind is ExperimentKind.CONVERGENCE:
            data = {
                "model": ModelSection.for_kind(model or ModelKind.SCALAR_TENSOR),
                "grid": GridSection(r=[10], n_rule=NRule.P32_RSTAR, n_constants=[8.0]),
                "solver": SolverSection(algorithms=[Algorithm.RGD, Algorithm.RGN]),
            }
            if model is ModelKind.TENSOR_VECTOR:
                data["grid"] = GridSection(
                    r=[10], n_rule=NRule.P2_OVER_LAMBDA2, n_constants=[2.0, 4.0]
                )
        elif kind is ExperimentKind.RANK_SWEEP:
            data = {
                "model": ModelSection.for_kind(model or ModelKind.SCALAR_TENSOR),
                "grid": GridSection(r=[3, 6, 9, 12, 15], n=[500, 1000, 2000, 4000, 8000]),
                "solver": SolverSection(algorithms=[Algorithm.RGD, Algorithm.RGN]),
            }
        elif kind is ExperimentKind.PHASE:
            data = {
                "model": ModelSection.for_kind(model or ModelKind.MATRIX_TRACE),
                "grid": GridSection(r=[1], n=[100, 200, 300, 400, 500, 600]),
                "solver": SolverSection(algorithms=[Algorithm.RGD]),
            }
        elif kind is ExperimentKind.COMPARE:
            data = {
                "model": ModelSection.for_kind(model or ModelKind.SCALAR_TENSOR),
                "grid": GridSection(r=[3, 10], n_rule=NRule.P32_RSTAR, n_constants=[8.0]),
                "solver": SolverSection(algorithms=list(Algorithm)),
            }
        else:
            data = {"model": ModelSection.for_kind(model or ModelKind.SCALAR_TENSOR)}
        if "grid" in data:
            # Protocol ranks beyond the smallest dimension fall back to the true rank.
            fitting = [r for r in data["grid"].r if r <= min(data["model"].dims)]
            ranks = fitting or [data["model"].r_star]
            data["grid"] = data["grid"].model_copy(update={"r": ranks})
        return cls(experiment=kind, **data)

    def with_overrides(self, overrides: Dict[str, Any]) -> "ExperimentConfig":
        """Apply ``{"section.key": value}`` overrides and re-validate.

        Raises:
            ConfigValidationError: If a key does not exist or a value is invalid.
        """
        data = self.model_dump(mode="json")
        for key, value in overrides.items():
            *path, leaf = key.split(".")
            node = data
            for part in path:
                if not isinstance(node.get(part), dict):
                    raise ConfigValidationError(f"unknown config section '{part}'", field=key)
                node = node[part]
            if leaf not in node:
                raise ConfigValidationError(f"unknown config key '{leaf}'", field=key)
            node[leaf] = value
            logger.debug(f"Config override {key}={value!r}")
        return self.from_dict(data)

    def with_model(self, kind: Union[ModelKind, str]) -> "ExperimentConfig":
        """Swap in the default model section for ``kind``, keeping the noise level."""
        model = ModelSection.for_kind(kind, sigma=self.model.sigma)
        return self.model_copy(update={"model": model})

    def with_seed(self, base_seed: int) -> "ExperimentConfig":
        return self.with_overrides({"grid.base_seed": base_seed})

    @property
    def experiment_id(self) -> str:
        """Configured id, or the experiment kind plus a digest of the config."""
        if self.output.experiment_id:
            return self.output.experiment_id
        payload = json.dumps(self.model_dump(mode="json", exclude={"output"}), sort_keys=True)
        digest = hashlib.sha256(payload.encode()).hexdigest()[:10]
        return f"{self.experiment.value}-{digest}"

    @property
    def input_ranks(self) -> List[int]:
        return list(self.grid.r) or [self.model.r_star]

    @property
    def retraction(self) -> Retraction:
        if self.solver.retraction is not None:
            return self.solver.retraction
        if self.model.kind is ModelKind.MATRIX_TRACE:
            return Retraction.MATRIX_SVD
        return Retraction.STHOSVD

    def solver_config(self, algorithm: Algorithm, rank: int) -> SolverConfig:
        s = self.solver
        return SolverConfig(
            algorithm=algorithm,
            input_rank=(rank,) * len(self.model.dims),
            max_iters=s.max_iters,
            tol_rel_rmse=s.tol_rel_rmse,
            retraction=self.retraction,
            baseline_stepsizes=tuple(s.baseline_stepsizes),
            baseline_trial_iters=s.baseline_trial_iters,
            ridge_eps=s.ridge_eps,
            use_closed_form=s.use_closed_form,
        )

    def check(self) -> None:
        """Cross-section checks for the configured experiment.

        Raises:
            ConfigValidationError: If the grids cannot drive the experiment.
        """
        name = self.experiment.value
        if self.experiment is ExperimentKind.LDP_TABLE:
            return
        grid = self.grid
        if grid.n_rule is None and not grid.n:
            raise ConfigValidationError(
                "sample-size grid is empty and no n_rule is set", "grid.n", name
            )
        if any(r > min(self.model.dims) for r in self.input_ranks):
            raise ConfigValidationError(
                f"input ranks {self.input_ranks} exceed dims {self.model.dims}",
                "grid.r",
                name,
            )
        if grid.search is SearchMode.INCREMENTAL:
            if self.experiment is not ExperimentKind.PHASE:
                raise ConfigValidationError(
                    "incremental search only applies to phase experiments",
                    "grid.search",
                    name,
                )
            if grid.n_rule is not None or not grid.n:
                raise ConfigValidationError(
                    "incremental search needs an explicit n grid", "grid.n", name
                )
        if self.retraction is Retraction.MATRIX_SVD and len(self.model.dims) != 2:
            raise ConfigValidationError(
                "matrix SVD retraction needs order-2 parameters", "solver.retraction", name
            )
