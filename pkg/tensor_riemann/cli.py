"""
CLI entry point for tensor_riemann.
"""

import functools
import json
import logging
from pathlib import Path
from typing import Optional, Sequence

import click
import pandas as pd
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.table import Table

from . import __version__
from .config import config
from .core.exceptions import InvalidArgumentError, TensorError
from .experiments import (
    ConfigValidationError,
    ExperimentConfig,
    ExperimentIOError,
    ExperimentKind,
    ModelKind,
    build_instance,
    run_experiment,
    write_csv,
)
from .experiments.config import MAX_SEED
from .regression import estimate_trip, save_instance
from .utils import format_shape, parse_overrides

logger = logging.getLogger(__name__)

console = Console(stderr=True)

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]

EXIT_CONFIG_ERROR = 1
EXIT_IO_ERROR = 2

# Unknown --section.key=value arguments are collected as config overrides.
OVERRIDE_CONTEXT = {"ignore_unknown_options": True, "allow_extra_args": True}


def setup_logging(level: str) -> None:
    """Route all log records through a rich handler on stderr."""
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, show_path=False, rich_tracebacks=True)],
        force=True,
    )


def _fail(ctx: click.Context, code: int, title: str, error: Exception) -> None:
    console.print(f"[red]{title}:[/red] {escape(str(error))}")
    ctx.exit(code)


def handle_errors(func):
    """Map configuration errors to exit code 1 and I/O errors to exit code 2."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return func(*args, **kwargs)
        except ConfigValidationError as e:
            _fail(ctx, EXIT_CONFIG_ERROR, "Invalid configuration", e)
        except InvalidArgumentError as e:
            _fail(ctx, EXIT_CONFIG_ERROR, "Invalid argument", e)
        except ExperimentIOError as e:
            _fail(ctx, EXIT_IO_ERROR, "I/O error", e)
        except TensorError as e:
            _fail(ctx, EXIT_CONFIG_ERROR, "Numerical error", e)

    return wrapper


def experiment_options(func):
    """Options shared by every experiment command."""
    options = [
        click.option(
            "--config",
            "config_path",
            type=click.Path(dir_okay=False),
            default=None,
            help="Experiment config (JSON)",
        ),
        click.option(
            "--out",
            "out_path",
            type=click.Path(dir_okay=False),
            default=None,
            help="CSV destination (default: stdout)",
        ),
        click.option(
            "--seed",
            type=click.IntRange(0, MAX_SEED),
            default=None,
            help="Base seed (unsigned 64-bit)",
        ),
        click.option(
            "--jobs",
            "-j",
            type=click.IntRange(min=1),
            default=None,
            help="Parallel grid cells (default: TENSOR_RIEMANN_JOBS or 1)",
        ),
        click.option(
            "--model",
            type=click.Choice([k.value for k in ModelKind]),
            default=None,
            help="Regression model",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def build_config(
    kind: ExperimentKind,
    config_path: Optional[str],
    model: Optional[str],
    seed: Optional[int],
    extra_args: Sequence[str],
) -> ExperimentConfig:
    """Defaults or config file, then --model, --seed and --section.key=value overrides."""
    if config_path:
        cfg = ExperimentConfig.load(config_path)
        if cfg.experiment is not kind:
            cfg = cfg.model_copy(update={"experiment": kind})
        if model:
            cfg = cfg.with_model(model)
    else:
        cfg = ExperimentConfig.default_for(kind, ModelKind(model) if model else None)
    if seed is not None:
        cfg = cfg.with_seed(seed)
    try:
        overrides = parse_overrides(extra_args)
    except ValueError as e:
        raise ConfigValidationError(str(e)) from e
    if overrides:
        cfg = cfg.with_overrides(overrides)
    cfg.check()
    return cfg


def _summary_table(cfg: ExperimentConfig, frame: pd.DataFrame) -> Table:
    table = Table(title=f"{cfg.experiment.value} · {cfg.experiment_id}")
    if cfg.experiment is ExperimentKind.PHASE:
        for column in ["algorithm", "r", "n", "success_rate"]:
            table.add_column(column)
        for row in frame.itertuples(index=False):
            table.add_row(row.algorithm, str(row.r), str(row.n), f"{row.success_rate:.2f}")
    elif cfg.experiment is ExperimentKind.LDP_TABLE:
        table.add_column("rows")
        table.add_column("mc PASS")
        checks = frame[frame["row_type"] == "mc"]
        table.add_row(str(len(frame)), f"{(checks['verdict'] == 'PASS').sum()}/{len(checks)}")
    else:
        table.add_column("algorithm")
        table.add_column("runs")
        table.add_column("median final rel_rmse")
        runs = frame.dropna(subset=["iter"]).groupby(["algorithm", "seed", "n", "r"])
        finals = runs.tail(1)
        for algorithm, group in finals.groupby("algorithm"):
            table.add_row(algorithm, str(len(group)), f"{group['rel_rmse'].median():.3e}")
    return table


def _run(
    ctx: click.Context,
    kind: ExperimentKind,
    config_path: Optional[str],
    out_path: Optional[str],
    seed: Optional[int],
    jobs: Optional[int],
    model: Optional[str],
) -> None:
    cfg = build_config(kind, config_path, model, seed, ctx.args)
    jobs = jobs or config.runtime.jobs
    frame = run_experiment(cfg, jobs)
    path = write_csv(frame, cfg, out_path or cfg.output.path)
    console.print(_summary_table(cfg, frame))
    if path is not None:
        console.print(f"Results written to {path}")


@click.group()
@click.version_option(version=__version__, prog_name="tensor-riemann")
@click.option(
    "--log-level",
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    default=None,
    help="Logging level (default: TENSOR_RIEMANN_LOG_LEVEL or WARNING)",
)
def cli(log_level: Optional[str]):
    """tensor-riemann - low-rank tensor regression experiments."""
    setup_logging((log_level or config.runtime.log_level).upper())


@cli.command(context_settings=OVERRIDE_CONTEXT)
@experiment_options
@click.pass_context
@handle_errors
def convergence(ctx, config_path, out_path, seed, jobs, model):
    """
    Per-iteration error traces of the configured algorithms.

    Examples:
        tensor-riemann convergence --out conv.csv
        tensor-riemann convergence --model tensor-vector --grid.seeds=2
    """
    _run(ctx, ExperimentKind.CONVERGENCE, config_path, out_path, seed, jobs, model)


@cli.command(context_settings=OVERRIDE_CONTEXT)
@experiment_options
@click.pass_context
@handle_errors
def phase(ctx, config_path, out_path, seed, jobs, model):
    """
    Recovery success rates over the (n, r) grid.

    Example:
        tensor-riemann phase --grid.search=incremental --grid.n_step=100
    """
    _run(ctx, ExperimentKind.PHASE, config_path, out_path, seed, jobs, model)


@cli.command("rank-sweep", context_settings=OVERRIDE_CONTEXT)
@experiment_options
@click.pass_context
@handle_errors
def rank_sweep(ctx, config_path, out_path, seed, jobs, model):
    """Convergence across input ranks, with minimal successful n per rank."""
    _run(ctx, ExperimentKind.RANK_SWEEP, config_path, out_path, seed, jobs, model)


@cli.command(context_settings=OVERRIDE_CONTEXT)
@experiment_options
@click.pass_context
@handle_errors
def compare(ctx, config_path, out_path, seed, jobs, model):
    """RGN, RGD and the baselines on identical instances and starting points."""
    _run(ctx, ExperimentKind.COMPARE, config_path, out_path, seed, jobs, model)


@cli.command(context_settings=OVERRIDE_CONTEXT)
@experiment_options
@click.pass_context
@handle_errors
def ldp(ctx, config_path, out_path, seed, jobs, model):
    """
    Low-degree threshold table and Monte Carlo checks of Hermite expectations.

    Example:
        tensor-riemann ldp --ldp.p_grid=[30,90] --ldp.mc_profiles=10
    """
    _run(ctx, ExperimentKind.LDP_TABLE, config_path, out_path, seed, jobs, model)


@cli.command("gen-instance", context_settings=OVERRIDE_CONTEXT)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None)
@click.option("--model", type=click.Choice([k.value for k in ModelKind]), default=None)
@click.option("--n", "n", type=click.IntRange(min=1), default=None, help="Sample size")
@click.option("--n-slot", type=click.IntRange(min=0), default=0, help="Rule constant index")
@click.option("--seed", type=click.IntRange(0, MAX_SEED), default=None, help="Base seed")
@click.option("--seed-index", type=click.IntRange(min=0), default=0, help="Replicate")
@click.option(
    "--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Directory"
)
@click.pass_context
@handle_errors
def gen_instance(ctx, config_path, model, n, n_slot, seed, seed_index, out_dir):
    """
    Write the instance an experiment would generate to a directory.

    Under the p2_over_lambda2 rule the instance is picked by --n-slot and --n
    defaults to the rule's sample size.
    """
    cfg = build_config(ExperimentKind.CONVERGENCE, config_path, model, seed, ctx.args)
    instance = build_instance(cfg, n, seed_index, n_slot)
    if out_dir is None:
        n = instance.design.n
        name = f"instance-{cfg.model.kind.value}-{format_shape(cfg.model.dims)}-n{n}"
        out_dir = config.get_output_dir() / f"{name}-s{seed_index}"
    try:
        path = save_instance(out_dir, instance)
    except OSError as e:
        raise ExperimentIOError(f"cannot write instance: {e}", path=str(out_dir)) from e
    console.print(f"Instance written to {path}")


@cli.command("trip-estimate", context_settings=OVERRIDE_CONTEXT)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None)
@click.option("--model", type=click.Choice([k.value for k in ModelKind]), default=None)
@click.option("--n", "n", type=click.IntRange(min=1), required=True, help="Sample size")
@click.option("--rank", type=click.IntRange(min=1), default=None, help="Tucker rank")
@click.option("--trials", type=click.IntRange(min=1), default=200)
@click.option("--seed", type=click.IntRange(0, MAX_SEED), default=None, help="Base seed")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@handle_errors
def trip_estimate(ctx, config_path, model, n, rank, trials, seed, out_path):
    """Sampled restricted-isometry constant of a generated design."""
    cfg = build_config(ExperimentKind.CONVERGENCE, config_path, model, seed, ctx.args)
    instance = build_instance(cfg, n)
    rank = rank or cfg.model.r_star
    order = len(cfg.model.dims)
    estimate = estimate_trip(instance.design, (rank,) * order, trials, cfg.grid.base_seed)

    table = Table(title=f"TRIP estimate · n={n} · rank={rank}")
    for column in ["rmin", "rmax", "constant", "trials"]:
        table.add_column(column)
    table.add_row(
        f"{estimate.rmin:.6f}",
        f"{estimate.rmax:.6f}",
        f"{estimate.constant:.6f}",
        str(estimate.trials),
    )
    console.print(table)
    if out_path:
        frame = pd.DataFrame(
            [
                {
                    "n": n,
                    "rank": rank,
                    "rmin": estimate.rmin,
                    "rmax": estimate.rmax,
                    "constant": estimate.constant,
                    "trials": estimate.trials,
                }
            ]
        )
        write_csv(frame, cfg, out_path)


@cli.group("config")
def config_cmd():
    """Configuration management commands."""
    pass


@config_cmd.command("show")
def config_show():
    """Show the runtime configuration."""
    click.echo(json.dumps(config.model_dump(mode="json"), indent=2))


@config_cmd.command("schema")
def config_schema():
    """Print the JSON schema of experiment configs."""
    click.echo(json.dumps(ExperimentConfig.model_json_schema(), indent=2))


@config_cmd.command("init")
@click.option(
    "--experiment",
    type=click.Choice([k.value for k in ExperimentKind]),
    default=ExperimentKind.CONVERGENCE.value,
)
@click.option("--model", type=click.Choice([k.value for k in ModelKind]), default=None)
@click.option("--path", default="experiment.json", help="Config file to create")
def config_init(experiment: str, model: Optional[str], path: str):
    """Write the default config of an experiment."""
    config_file = Path(path).expanduser()
    if config_file.exists():
        click.echo(f"Config already exists at {config_file}")
        return
    cfg = ExperimentConfig.default_for(experiment, ModelKind(model) if model else None)
    config_file.parent.mkdir(parents=True, exist_ok=True)
    config_file.write_text(json.dumps(cfg.model_dump(mode="json"), indent=2))
    click.echo(f"Created config at {config_file}")


def main():
    """Main entry point for CLI."""
    cli()


if __name__ == "__main__":
    main()
