"""
Iteration driver for the Riemannian solvers and the baselines.
"""

import logging
import time
from typing import Optional, Tuple

import numpy as np

from ..core.exceptions import (
    DegenerateDesignError,
    DegeneratePointError,
    InvalidArgumentError,
    NumericalFailureError,
)
from ..manifold.gauge import Gauge, compute_gauge
from ..regression.design import DesignKind
from ..regression.instance import ProblemInstance, relative_error
from ..tucker.decomposition import TuckerTensor
from ..tucker.linalg import orthonormal_complement
from .baselines import (
    BaselineState,
    baseline_step,
    has_diverged,
    initial_baseline_state,
    select_baseline_stepsize,
)
from .config import Algorithm, SolverConfig
from .gauss_newton import rgn_step, rgn_step_vector_closed_form
from .gradient import loss, rgd_step
from .trace import IterationRecord, RunTrace, TerminationReason

logger = logging.getLogger(__name__)


def pad_to_rank(x: TuckerTensor, rank: Tuple[int, ...]) -> TuckerTensor:
    """Embed ``x`` at a larger Tucker rank.

    The core is zero-extended and each factor is completed with leading columns
    of its orthonormal complement.

    Raises:
        InvalidArgumentError: If ``x`` has a mode rank above ``rank``.
    """
    rank = tuple(rank)
    if len(rank) != x.order or any(r < q for r, q in zip(rank, x.rank)):
        raise InvalidArgumentError(
            f"starting rank {x.rank} exceeds input rank {rank}",
            operation="solve",
            field="x0",
        )
    if rank == x.rank:
        return x
    if any(r > p for r, p in zip(rank, x.shape)):
        raise InvalidArgumentError(
            f"input rank {rank} exceeds dims {x.shape}", operation="solve", field="rank"
        )
    core = np.zeros(rank)
    core[tuple(slice(0, q) for q in x.rank)] = x.core
    factors = []
    for u, r in zip(x.factors, rank):
        extra = orthonormal_complement(u)[:, : r - u.shape[1]]
        factors.append(np.hstack([u, extra]))
    return TuckerTensor(core, tuple(factors))


class RiemannianSolver:
    """Runs one configured algorithm on one problem instance.

    Step failures end the run with a termination reason instead of raising.
    """

    def __init__(self, instance: ProblemInstance, config: Optional[SolverConfig] = None):
        self.instance = instance
        self.config = config or SolverConfig(input_rank=(1,) * len(instance.param_shape))
        self._truth = instance.truth_dense
        if len(self.config.input_rank) != len(instance.param_shape):
            raise InvalidArgumentError(
                f"input rank {self.config.input_rank} has the wrong order for "
                f"parameter shape {instance.param_shape}",
                operation="solve",
                field="input_rank",
            )

    def _gauge(self, x: TuckerTensor) -> Gauge:
        try:
            return compute_gauge(x)
        except DegeneratePointError as e:
            logger.info(f"Degenerate gauge ({e}); padding row-space bases")
            return compute_gauge(x, pad=True)

    def _riemannian_step(self, x: TuckerTensor) -> Tuple[TuckerTensor, float]:
        cfg = self.config
        gauge = self._gauge(x)
        if cfg.algorithm is Algorithm.RGD:
            return rgd_step(self.instance, x, cfg, gauge)
        use_closed_form = (
            cfg.use_closed_form
            and self.instance.design.kind is DesignKind.VECTOR
            and not gauge.is_padded
        )
        if use_closed_form:
            return rgn_step_vector_closed_form(self.instance, x, cfg, gauge), 0.0
        return rgn_step(self.instance, x, cfg, gauge), 0.0

    def _record(
        self,
        trace: RunTrace,
        it: int,
        dense: np.ndarray,
        stepsize: float,
        start: int,
        current_loss: Optional[float] = None,
        aborted: bool = False,
    ) -> IterationRecord:
        if current_loss is None:
            current_loss = loss(self.instance, dense)
        record = IterationRecord(
            iter=it,
            rel_rmse=None if self._truth is None else relative_error(dense, self._truth),
            loss=current_loss,
            stepsize=stepsize,
            elapsed_ns=time.perf_counter_ns() - start,
            aborted=aborted,
        )
        trace.append(record)
        return record

    def _converged(self, record: IterationRecord, previous_loss: float) -> bool:
        tol = self.config.tol_rel_rmse
        if record.rel_rmse is not None:
            return record.rel_rmse <= tol
        scale = max(previous_loss, np.finfo(float).tiny)
        return abs(previous_loss - record.loss) <= tol * scale

    def run(self, x0: TuckerTensor) -> Tuple[TuckerTensor, RunTrace]:
        """Iterate from ``x0`` until the stopping rule or ``max_iters``."""
        cfg = self.config
        x = pad_to_rank(x0, cfg.input_rank)
        trace = RunTrace()
        start = time.perf_counter_ns()
        first = self._record(trace, 0, x.dense(), 0.0, start)
        baseline = cfg.algorithm in (Algorithm.PGD, Algorithm.FACTORED_GD)
        if baseline:
            trace.selected_stepsize = select_baseline_stepsize(self.instance, x, cfg)
            state: BaselineState = initial_baseline_state(x, cfg)
            logger.info(f"Baseline {cfg.algorithm.value} stepsize {trace.selected_stepsize}")
        if first.rel_rmse is not None and first.rel_rmse <= cfg.tol_rel_rmse:
            trace.termination = TerminationReason.TOL_REACHED
            return x, trace

        previous = first
        trace.termination = TerminationReason.MAX_ITERS
        for it in range(1, cfg.max_iters + 1):
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    if baseline:
                        stepsize = trace.selected_stepsize
                        candidate = baseline_step(self.instance, state, stepsize, cfg)
                        dense = candidate.dense()
                    else:
                        x_next, stepsize = self._riemannian_step(x)
                        dense = x_next.dense()
            except DegeneratePointError as e:
                logger.warning(f"Stopping at iteration {it}: {e}")
                trace.termination = TerminationReason.DEGENERATE
                break
            except (NumericalFailureError, DegenerateDesignError) as e:
                logger.warning(f"Stopping at iteration {it}: {e}")
                trace.termination = TerminationReason.NUMERICAL_FAILURE
                break

            current_loss = loss(self.instance, dense)
            if baseline and has_diverged(current_loss, first.loss):
                if np.isfinite(current_loss):
                    self._record(
                        trace, it, dense, stepsize, start, current_loss, aborted=True
                    )
                logger.warning(f"Baseline diverged at iteration {it}; aborting run")
                trace.termination = TerminationReason.DIVERGED
                break
            if not np.isfinite(current_loss):
                trace.termination = TerminationReason.NUMERICAL_FAILURE
                break

            if baseline:
                state = candidate
            else:
                x = x_next
            record = self._record(trace, it, dense, stepsize, start, current_loss)
            stationary = cfg.algorithm is Algorithm.RGD and stepsize == 0.0
            if stationary or self._converged(record, previous.loss):
                trace.termination = TerminationReason.TOL_REACHED
                break
            previous = record

        if baseline:
            x = state if isinstance(state, TuckerTensor) else state.to_tucker()
        logger.info(
            f"{cfg.algorithm.value} finished after {trace.iterations} iterations: "
            f"{trace.termination.value}, rel_rmse={trace.final_rel_rmse}"
        )
        return x, trace


def solve(
    instance: ProblemInstance, cfg: SolverConfig, x0: TuckerTensor
) -> Tuple[TuckerTensor, RunTrace]:
    """Run ``cfg.algorithm`` from ``x0``; see :class:`RiemannianSolver`."""
    return RiemannianSolver(instance, cfg).run(x0)
