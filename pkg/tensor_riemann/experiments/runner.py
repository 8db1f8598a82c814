"""
Experiment runners: convergence traces, phase transitions, rank sweeps,
baseline comparisons and low-degree tables.

Grid cells run in a process pool when ``jobs > 1``; results are gathered back
into grid order before any row is emitted, so output does not depend on
scheduling.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..core.exceptions import InvalidArgumentError, TensorError
from ..initialization.spectral import spectral_initialization
from ..ldp.hermite import (
    HermiteDegreeProfile,
    correlated_expectation,
    mc_verify_expectation,
    random_profile,
)
from ..ldp.threshold import gap_table
from ..regression.design import adjoint
from ..regression.instance import (
    ProblemInstance,
    generate_gaussian_instance,
    min_mode_singular_value,
)
from ..solvers.config import Algorithm
from ..solvers.solve import solve
from ..solvers.trace import RunTrace
from ..tucker.decomposition import TuckerTensor, thosvd
from ..utils import replicate_seed
from .config import ExperimentConfig, ExperimentKind, NRule, SearchMode

logger = logging.getLogger(__name__)

CONVERGENCE_COLUMNS = [
    "experiment_id",
    "model",
    "algorithm",
    "seed",
    "n",
    "r",
    "r_star",
    "sigma",
    "iter",
    "rel_rmse",
    "loss",
    "stepsize",
    "elapsed_ms",
]

COMPARE_COLUMNS = CONVERGENCE_COLUMNS[:-1] + ["aborted", "selected_stepsize", "elapsed_ms"]

RANK_SWEEP_COLUMNS = CONVERGENCE_COLUMNS[:-1] + [
    "n_cuberoot",
    "row_type",
    "success_rate",
    "min_success_n",
    "elapsed_ms",
]

PHASE_COLUMNS = [
    "experiment_id",
    "model",
    "algorithm",
    "n",
    "r",
    "r_star",
    "sigma",
    "seeds",
    "successes",
    "success_rate",
    "median_rel_rmse",
]

MC_COLUMNS = ["profile", "alpha", "beta", "u", "exact", "mc_estimate", "mc_stderr", "verdict"]

# Monte Carlo agreement band, in standard errors.
MC_PASS_STDERRS = 3.0


@dataclass(frozen=True)
class RunCell:
    """One instance of the grid, identified by its replicate and sample-size slot.

    ``n_slot`` is the sample size itself, or the position of the rule constant
    when the sample size depends on the drawn truth.
    """

    seed_index: int
    n_slot: int
    rank: int
    n: Optional[int] = None


@dataclass
class ReplicateResult:
    """Trace of one algorithm on one grid instance."""

    cell: RunCell
    seed: int
    n: int
    algorithm: Algorithm
    trace: RunTrace

    @property
    def final_rel_rmse(self) -> Optional[float]:
        return self.trace.final_rel_rmse


def _generate(cfg: ExperimentConfig, n: int, seed: int) -> ProblemInstance:
    model = cfg.model
    return generate_gaussian_instance(
        model.dims,
        model.d,
        model.m,
        model.r_star,
        model.sigma,
        n,
        seed,
        kind=model.kind.design_kind,
    )


def resolve_sample_size(cfg: ExperimentConfig, cell: RunCell, seed: int) -> int:
    """Sample size of ``cell``: explicit, or from the configured rule."""
    if cell.n is not None:
        return cell.n
    model, grid = cfg.model, cfg.grid
    c = grid.n_constants[cell.n_slot]
    p = max(model.dims)
    if grid.n_rule is NRule.P32_RSTAR:
        return int(math.ceil(c * p**1.5 * model.r_star))
    # The truth is drawn before the covariates, so a one-sample draw shares it.
    head = _generate(cfg, 1, seed)
    lam = min_mode_singular_value(head.truth_dense, (model.r_star,) * len(model.dims))
    return int(math.ceil(c * p**2 / lam**2))


def grid_cells(cfg: ExperimentConfig, ranks: Optional[Sequence[int]] = None) -> List[RunCell]:
    """Cells in emission order: seed, then sample size, then rank."""
    grid = cfg.grid
    ranks = list(ranks) if ranks is not None else cfg.input_ranks
    if grid.n_rule is NRule.P2_OVER_LAMBDA2:
        slots = [(i, None) for i in range(len(grid.n_constants))]
    elif grid.n_rule is NRule.P32_RSTAR:
        p = max(cfg.model.dims)
        sizes = [int(math.ceil(c * p**1.5 * cfg.model.r_star)) for c in grid.n_constants]
        slots = [(n, n) for n in sizes]
    else:
        slots = [(n, n) for n in grid.n]
    return [
        RunCell(seed_index, slot, rank, n)
        for seed_index in range(grid.seeds)
        for slot, n in slots
        for rank in ranks
    ]


def initial_point(instance: ProblemInstance, rank: int, cfg: ExperimentConfig) -> TuckerTensor:
    """Spectral initialization, or T-HOSVD of the adjoint when it cannot run."""
    try:
        return spectral_initialization(instance, rank, cfg.solver.hooi_inplace)
    except TensorError as e:
        logger.warning(f"Spectral initialization failed ({e}); using T-HOSVD of A*(Y)")
        t = adjoint(instance.design, instance.observations)
        return thosvd(t, (rank,) * t.ndim)


def run_cell(
    cfg: ExperimentConfig, cell: RunCell, algorithms: Sequence[Algorithm]
) -> List[ReplicateResult]:
    """Generate the cell's instance and run every algorithm from one shared start."""
    seed = replicate_seed(cfg.grid.base_seed, (cell.seed_index, cell.n_slot))
    n = resolve_sample_size(cfg, cell, seed)
    instance = _generate(cfg, n, seed)
    x0 = initial_point(instance, cell.rank, cfg)
    results = []
    for algorithm in algorithms:
        _, trace = solve(instance, cfg.solver_config(algorithm, cell.rank), x0)
        results.append(ReplicateResult(cell, seed, n, algorithm, trace))
    logger.info(
        f"Cell seed#{cell.seed_index} n={n} r={cell.rank}: "
        + ", ".join(f"{r.algorithm.value}={r.final_rel_rmse}" for r in results)
    )
    return results


def map_cells(
    cfg: ExperimentConfig,
    cells: Sequence[RunCell],
    algorithms: Sequence[Algorithm],
    jobs: int = 1,
) -> List[ReplicateResult]:
    """Run ``cells`` (in parallel when ``jobs > 1``) and flatten in grid order."""
    if jobs <= 1 or len(cells) <= 1:
        batches = [run_cell(cfg, cell, algorithms) for cell in cells]
    else:
        batches = [None] * len(cells)
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            futures = {
                executor.submit(run_cell, cfg, cell, list(algorithms)): i
                for i, cell in enumerate(cells)
            }
            for future in as_completed(futures):
                batches[futures[future]] = future.result()
    return [result for batch in batches for result in batch]


def _succeeded(result: ReplicateResult, threshold: float) -> bool:
    rel = result.final_rel_rmse
    return rel is not None and rel < threshold


def trace_frame(cfg: ExperimentConfig, result: ReplicateResult) -> pd.DataFrame:
    """Per-iteration rows of one run."""
    records = result.trace.to_frame()
    return pd.DataFrame(
        {
            "experiment_id": cfg.experiment_id,
            "model": cfg.model.kind.value,
            "algorithm": result.algorithm.value,
            # u64 seeds do not fit every integer dtype pandas might pick on concat
            "seed": str(result.seed),
            "n": result.n,
            "r": result.cell.rank,
            "r_star": cfg.model.r_star,
            "sigma": cfg.model.sigma,
            "iter": records["iter"],
            "rel_rmse": records["rel_rmse"].astype(float),
            "loss": records["loss"],
            "stepsize": records["stepsize"],
            "aborted": records["aborted"],
            "selected_stepsize": (
                np.nan
                if result.trace.selected_stepsize is None
                else result.trace.selected_stepsize
            ),
            "elapsed_ms": records["elapsed_ns"] / 1e6,
        }
    )


def _concat(frames: List[pd.DataFrame], columns: List[str]) -> pd.DataFrame:
    if not frames:
        return pd.DataFrame(columns=columns)
    return pd.concat(frames, ignore_index=True).reindex(columns=columns)


def run_convergence(cfg: ExperimentConfig, jobs: int = 1) -> pd.DataFrame:
    """One row per iteration for every (seed, sample size, rank, algorithm)."""
    cfg.check()
    results = map_cells(cfg, grid_cells(cfg), cfg.solver.algorithms, jobs)
    return _concat([trace_frame(cfg, r) for r in results], CONVERGENCE_COLUMNS)


def run_compare(cfg: ExperimentConfig, jobs: int = 1) -> pd.DataFrame:
    """Convergence traces of every algorithm from the same start on the same instances.

    Divergent baselines keep their aborted last row; the selected baseline
    stepsize is recorded on every row of its run.
    """
    cfg.check()
    results = map_cells(cfg, grid_cells(cfg), cfg.solver.algorithms, jobs)
    return _concat([trace_frame(cfg, r) for r in results], COMPARE_COLUMNS)


def _phase_row(
    cfg: ExperimentConfig,
    algorithm: Algorithm,
    n: int,
    rank: int,
    results: Sequence[ReplicateResult],
) -> dict:
    threshold = cfg.solver.success_threshold
    successes = sum(_succeeded(r, threshold) for r in results)
    finals = [r.final_rel_rmse for r in results if r.final_rel_rmse is not None]
    return {
        "experiment_id": cfg.experiment_id,
        "model": cfg.model.kind.value,
        "algorithm": algorithm.value,
        "n": n,
        "r": rank,
        "r_star": cfg.model.r_star,
        "sigma": cfg.model.sigma,
        "seeds": len(results),
        "successes": successes,
        "success_rate": successes / len(results) if results else np.nan,
        "median_rel_rmse": float(np.median(finals)) if finals else np.nan,
    }


def _group_results(
    results: Sequence[ReplicateResult],
) -> List[Tuple[Tuple[Algorithm, int, int], List[ReplicateResult]]]:
    """Group by (algorithm, n, rank), keeping first-seen order."""
    groups = {}
    for r in results:
        groups.setdefault((r.algorithm, r.n, r.cell.rank), []).append(r)
    return list(groups.items())


def _incremental_phase(cfg: ExperimentConfig, jobs: int) -> List[dict]:
    """Per rank, step ``n`` up from the previous rank's minimal success until success."""
    grid = cfg.grid
    n_max = max(grid.n)
    rows = []
    for algorithm in cfg.solver.algorithms:
        start = min(grid.n)
        for rank in sorted(cfg.input_ranks):
            n = start
            while n <= n_max:
                cells = [RunCell(s, n, rank, n) for s in range(grid.seeds)]
                results = map_cells(cfg, cells, [algorithm], jobs)
                row = _phase_row(cfg, algorithm, n, rank, results)
                rows.append(row)
                if row["success_rate"] >= grid.success_fraction:
                    start = n
                    break
                n += grid.n_step
            else:
                logger.warning(
                    f"{algorithm.value} r={rank}: no success up to n={n_max}"
                )
    return rows


def run_phase(cfg: ExperimentConfig, jobs: int = 1) -> pd.DataFrame:
    """Success rates over the (n, r) grid; success means final relative RMSE < threshold."""
    cfg.check()
    if cfg.grid.search is SearchMode.INCREMENTAL:
        rows = _incremental_phase(cfg, jobs)
    else:
        results = map_cells(cfg, grid_cells(cfg), cfg.solver.algorithms, jobs)
        rows = [
            _phase_row(cfg, algorithm, n, rank, group)
            for (algorithm, n, rank), group in _group_results(results)
        ]
        rows.sort(key=lambda row: (row["algorithm"], row["r"], row["n"]))
    return pd.DataFrame(rows, columns=PHASE_COLUMNS)


def minimal_success_n(phase: pd.DataFrame, success_fraction: float) -> pd.DataFrame:
    """Smallest ``n`` per (algorithm, r) whose success rate reaches ``success_fraction``."""
    passed = phase[phase["success_rate"] >= success_fraction]
    minimal = passed.groupby(["algorithm", "r"], sort=False)["n"].min()
    keys = phase[["algorithm", "r"]].drop_duplicates()
    return keys.merge(
        minimal.rename("min_success_n").reset_index(), on=["algorithm", "r"], how="left"
    )


def run_rank_sweep(cfg: ExperimentConfig, jobs: int = 1) -> pd.DataFrame:
    """Convergence traces across input ranks plus per-cell and minimal-n summary rows."""
    cfg.check()
    results = map_cells(cfg, grid_cells(cfg), cfg.solver.algorithms, jobs)
    traces = _concat([trace_frame(cfg, r) for r in results], RANK_SWEEP_COLUMNS)
    traces["row_type"] = "iteration"
    traces["n_cuberoot"] = np.cbrt(traces["n"].astype(float))

    phase = pd.DataFrame(
        [_phase_row(cfg, a, n, rank, g) for (a, n, rank), g in _group_results(results)],
        columns=PHASE_COLUMNS,
    )
    cells = phase[["experiment_id", "model", "algorithm", "n", "r", "r_star", "sigma"]].copy()
    cells["success_rate"] = phase["success_rate"]
    cells["n_cuberoot"] = np.cbrt(cells["n"].astype(float))
    cells["row_type"] = "cell"

    summary = minimal_success_n(phase, cfg.grid.success_fraction)
    summary["experiment_id"] = cfg.experiment_id
    summary["model"] = cfg.model.kind.value
    summary["r_star"] = cfg.model.r_star
    summary["sigma"] = cfg.model.sigma
    summary["row_type"] = "summary"
    return _concat([traces, cells, summary], RANK_SWEEP_COLUMNS)


def _profile_label(profile: HermiteDegreeProfile) -> str:
    beta = ",".join(str(b) for b in profile.beta)
    u = ",".join(format(v, ".17g") for v in profile.u)
    return f"alpha={profile.alpha};beta={beta};u={u}"


def _mc_row(profile: HermiteDegreeProfile, samples: int, seed: int) -> dict:
    exact = correlated_expectation(profile)
    estimate, stderr = mc_verify_expectation(profile, samples, seed)
    passed = abs(exact - estimate) <= MC_PASS_STDERRS * stderr
    return {
        "profile": _profile_label(profile),
        "alpha": profile.alpha,
        "beta": ",".join(str(b) for b in profile.beta),
        "u": ",".join(format(v, ".17g") for v in profile.u),
        "exact": exact,
        "mc_estimate": estimate,
        "mc_stderr": stderr,
        "verdict": "PASS" if passed else "FAIL",
    }


def _map_ordered(fn: Callable, args: Sequence[tuple], jobs: int) -> list:
    if jobs <= 1 or len(args) <= 1:
        return [fn(*a) for a in args]
    out = [None] * len(args)
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        futures = {executor.submit(fn, *a): i for i, a in enumerate(args)}
        for future in as_completed(futures):
            out[futures[future]] = future.result()
    return out


def run_ldp_table(cfg: ExperimentConfig, jobs: int = 1) -> pd.DataFrame:
    """Gap table rows for each order ``d`` followed by Monte Carlo verification rows."""
    ldp = cfg.ldp
    gaps = []
    for d in ldp.orders:
        table = gap_table(ldp.p_grid, d, ldp.r_star, ldp.degree, ldp.delta, ldp.sigma_sq)
        table.insert(0, "row_type", "gap")
        gaps.append(table)

    base = cfg.grid.base_seed
    rng = np.random.Generator(np.random.PCG64(replicate_seed(base, (0,))))
    args = []
    for i in range(ldp.mc_profiles):
        w = int(rng.integers(1, ldp.max_width + 1))
        profile = random_profile(rng, ldp.max_degree, w, ldp.u_budget)
        args.append((profile, ldp.mc_samples, replicate_seed(base, (1, i))))
    checks = pd.DataFrame(_map_ordered(_mc_row, args, jobs), columns=MC_COLUMNS)
    checks.insert(0, "row_type", "mc")
    failed = int((checks["verdict"] == "FAIL").sum())
    if failed:
        logger.warning(f"{failed} of {len(checks)} Monte Carlo checks outside the band")

    frame = pd.concat(gaps + [checks], ignore_index=True)
    frame.insert(0, "experiment_id", cfg.experiment_id)
    return frame


RUNNERS = {
    ExperimentKind.CONVERGENCE: run_convergence,
    ExperimentKind.RANK_SWEEP: run_rank_sweep,
    ExperimentKind.PHASE: run_phase,
    ExperimentKind.COMPARE: run_compare,
    ExperimentKind.LDP_TABLE: run_ldp_table,
}


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> pd.DataFrame:
    """Dispatch on ``cfg.experiment``."""
    logger.info(f"Running {cfg.experiment.value} ({cfg.experiment_id}) with {jobs} job(s)")
    return RUNNERS[cfg.experiment](cfg, jobs)


def build_instance(
    cfg: ExperimentConfig,
    n: Optional[int] = None,
    seed_index: int = 0,
    n_slot: int = 0,
) -> ProblemInstance:
    """The instance the grid generates for replicate ``seed_index``.

    Cells are keyed as in ``grid_cells``: by the sample size, or under the
    truth-dependent rule by ``n_slot``, the position of the rule constant. There
    ``n`` defaults to the rule's value and an explicit ``n`` keeps the cell's seed.
    """
    if cfg.grid.n_rule is NRule.P2_OVER_LAMBDA2:
        if not 0 <= n_slot < len(cfg.grid.n_constants):
            raise InvalidArgumentError(
                f"n_slot {n_slot} outside the {len(cfg.grid.n_constants)} rule constants",
                operation="build_instance",
                field="n_slot",
            )
        cell = RunCell(seed_index, n_slot, cfg.model.r_star, n)
    elif n is None:
        raise InvalidArgumentError(
            "a sample size is required outside the truth-dependent rule",
            operation="build_instance",
            field="n",
        )
    else:
        cell = RunCell(seed_index, n, cfg.model.r_star, n)
    seed = replicate_seed(cfg.grid.base_seed, (cell.seed_index, cell.n_slot))
    return _generate(cfg, resolve_sample_size(cfg, cell, seed), seed)
